use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use lpo_core::cnf::{build_phi, Window};
use lpo_core::ingest::{load_dataset, BenchmarkConfig};
use lpo_core::measures::Dataset;
use lpo_core::momcts::Mcts;
use lpo_core::momdp::MoMdp;
use lpo_core::oracle::Oracle;
use lpo_core::pipeline::{CorrectnessSlack, PipelineConfig, Termination};
use lpo_core::report::{self, FrontRow};
use lpo_core::sat::{emit_dimacs, format_answer, parse_dimacs, SOLVER_ENV};
use lpo_core::{Solver, SolverResult, TreeSpace};

#[derive(Parser)]
#[command(name = "lpo", version, about = "Locally Pareto-optimal decision-tree interpretations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run both phases and write verified.csv, best_effort.csv, front.csv,
    /// audit.jsonl and summary.json.
    Synth(SynthArgs),
    /// Enumerate the space and write the exact front and LPO set.
    Oracle(OracleArgs),
    /// Write the DIMACS query for one goodness window.
    Encode(EncodeArgs),
    /// Run the tree search only and write its archive.
    Mcts(MctsArgs),
    /// Solve a DIMACS file with the built-in solver, printing the standard
    /// `s`/`v` lines (exit 10 for SAT, 20 for UNSAT).
    Solve(SolveArgs),
}

#[derive(Args)]
struct Common {
    /// Benchmark configuration file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct SlackArgs {
    /// Correctness slack as a fraction of the sample count.
    #[arg(long, conflicts_with = "delta_c_count")]
    delta_c: Option<f64>,
    /// Correctness slack as a number of samples.
    #[arg(long)]
    delta_c_count: Option<u64>,
    /// Explainability slack.
    #[arg(long)]
    delta_e: Option<u64>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    slack: SlackArgs,
    /// Overall time budget in seconds.
    #[arg(long)]
    t_overall: Option<f64>,
    /// Phase-1 time budget in seconds (default: half the overall budget).
    #[arg(long)]
    t_momcts: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration cap for phase 1.
    #[arg(long)]
    mcts_iterations: Option<u64>,
    /// Stop phase 2 after this many SAT queries.
    #[arg(long)]
    max_sat_queries: Option<usize>,
    /// Solver: `builtin`, `dpll`, or an executable. Overrides the config and
    /// the environment.
    #[arg(long)]
    solver: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    slack: SlackArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    c_lo: u64,
    #[arg(long)]
    e_lo: u64,
    #[arg(long)]
    c_hi: u64,
    #[arg(long)]
    e_hi: u64,
    /// DIMACS output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `name id` lines for the named variables.
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Args)]
struct MctsArgs {
    #[command(flatten)]
    common: Common,
    /// Time budget in seconds (default: the configured phase-1 budget).
    #[arg(long)]
    t_momcts: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mcts_iterations: Option<u64>,
    /// Tab-separated per-iteration trace.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// Seconds before giving up with `s UNKNOWN`.
    #[arg(long, default_value_t = 3600.0)]
    timeout: f64,
}

/// A message and the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    fn solver(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Oracle(a) => oracle(a),
        Command::Encode(a) => encode(a),
        Command::Mcts(a) => mcts(a),
        Command::Solve(a) => solve(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

struct Loaded {
    config: BenchmarkConfig,
    space: TreeSpace,
    data: Dataset,
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let config = BenchmarkConfig::load(&common.config).map_err(Failure::config)?;
    let (space, data) = load_dataset(&config).map_err(Failure::config)?;
    info!(
        "{} samples, {} functions, {} labels, budget {}",
        data.len(),
        space.functions().len(),
        space.labels().len(),
        space.budget()
    );
    Ok(Loaded {
        config,
        space,
        data,
    })
}

fn seconds(s: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(s).map_err(|_| Failure::config(format!("invalid duration {s}")))
}

fn out_dir(flag: Option<PathBuf>, config: &BenchmarkConfig) -> PathBuf {
    flag.or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn apply_slack(slack: &SlackArgs, config: &mut PipelineConfig) {
    if let Some(f) = slack.delta_c {
        config.delta_c = CorrectnessSlack::Fraction(f);
    }
    if let Some(n) = slack.delta_c_count {
        config.delta_c = CorrectnessSlack::Count(n);
    }
    if let Some(e) = slack.delta_e {
        config.delta_e = e;
    }
}

fn pipeline_config(args: &SynthArgs, bench: &BenchmarkConfig) -> Result<PipelineConfig, Failure> {
    let mut config = bench.pipeline.to_config().map_err(Failure::config)?;
    if let Some(t) = args.t_overall {
        config.t_overall = seconds(t)?;
        if args.t_momcts.is_none() && bench.pipeline.t_momcts.is_none() {
            config.t_momcts = config.t_overall / 2;
        }
    }
    if let Some(t) = args.t_momcts {
        config.t_momcts = seconds(t)?;
    }
    apply_slack(&args.slack, &mut config);
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if args.mcts_iterations.is_some() {
        config.mcts_iterations = args.mcts_iterations;
    }
    if args.max_sat_queries.is_some() {
        config.max_sat_queries = args.max_sat_queries;
    }
    config.validate().map_err(Failure::config)?;
    Ok(config)
}

fn solver_for(flag: Option<&str>, config: &BenchmarkConfig) -> Solver {
    match flag {
        Some(spec) => Solver::from_spec(spec),
        None => Solver::from_env_or(config.solver.as_deref().unwrap_or("kissat")),
    }
}

fn synth(args: SynthArgs) -> Outcome {
    let loaded = load(&args.common)?;
    let config = pipeline_config(&args, &loaded.config)?;
    let solver = solver_for(args.solver.as_deref(), &loaded.config);
    info!("solver {solver:?} (override with --solver or {SOLVER_ENV})");
    let out = lpo_core::run(&loaded.space, &loaded.data, &config, &solver)
        .map_err(Failure::config)?;
    let dir = out_dir(args.out, &loaded.config);
    report::write_run(&dir, &loaded.space, loaded.data.len(), &out).map_err(Failure::config)?;
    eprintln!(
        "{} verified, {} unchecked, {} SAT queries ({:?}); wrote {}",
        out.verified.len(),
        out.best_effort.len(),
        out.audit.len(),
        out.termination,
        dir.display()
    );
    match out.termination {
        Termination::SolverError(msg) => Err(Failure::solver(msg)),
        _ => Ok(ExitCode::SUCCESS),
    }
}

fn oracle(args: OracleArgs) -> Outcome {
    let loaded = load(&args.common)?;
    let mut config = loaded
        .config
        .pipeline
        .to_config()
        .map_err(Failure::config)?;
    apply_slack(&args.slack, &mut config);
    let samples = loaded.data.len();
    let dc = config.delta_c.to_count(samples);
    let de = config.delta_e;
    let oracle = Oracle::build(&loaded.space, &loaded.data).map_err(Failure::config)?;
    let front = report::tree_rows(&oracle.front_entries(), &loaded.space, samples);
    let lpo = report::tree_rows(&oracle.incomparable_lpo_entries(dc, de), &loaded.space, samples);
    let dir = out_dir(args.out, &loaded.config);
    fs::create_dir_all(&dir).map_err(|e| Failure::config(format!("{}: {e}", dir.display())))?;
    report::write_tree_rows(&dir.join(report::VERIFIED_FILE), &lpo).map_err(Failure::config)?;
    let rows: Vec<FrontRow> = front
        .into_iter()
        .map(|r| FrontRow::new("front", r))
        .chain(lpo.iter().cloned().map(|r| FrontRow::new("lpo", r)))
        .collect();
    report::write_front(&dir.join(report::FRONT_FILE), &rows).map_err(Failure::config)?;
    eprintln!(
        "{} trees, front of {}, {} incomparable LPO for slack ({dc}, {de}); wrote {}",
        oracle.tree_count(),
        oracle.front().len(),
        lpo.len(),
        dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn write_or_stdout(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::config(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::config(format!("stdout: {e}"))),
    }
}

fn encode(args: EncodeArgs) -> Outcome {
    let loaded = load(&args.common)?;
    let window = Window::new(
        args.c_lo,
        args.e_lo,
        args.c_hi,
        args.e_hi,
        loaded.data.len(),
        loaded.space.max_explainability(),
    )
    .map_err(Failure::config)?;
    let instance = build_phi(&loaded.space, &loaded.data, window).map_err(Failure::config)?;
    write_or_stdout(args.out.as_deref(), &emit_dimacs(&instance.cnf))?;
    if let Some(map) = &args.map {
        fs::write(map, instance.vars.sidecar(&loaded.space))
            .map_err(|e| Failure::config(format!("{}: {e}", map.display())))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn mcts(args: MctsArgs) -> Outcome {
    let loaded = load(&args.common)?;
    let base = loaded
        .config
        .pipeline
        .to_config()
        .map_err(Failure::config)?;
    let budget = match args.t_momcts {
        Some(t) => seconds(t)?,
        None => base.t_momcts,
    };
    let mdp = MoMdp::new(&loaded.space, &loaded.data, base.restrictions);
    let mcts_config = lpo_core::MctsConfig {
        seed: args.seed.unwrap_or(base.seed),
        max_iterations: args.mcts_iterations.or(base.mcts_iterations),
        ..base.mcts.clone()
    };
    let trace = match &args.trace {
        Some(p) => Some(
            fs::File::create(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let mut search = Mcts::new(&mdp, mcts_config);
    if let Some(file) = trace {
        search = search.with_trace(std::io::BufWriter::new(file));
    }
    search.run_until(Instant::now() + budget);
    let iterations = search.iterations();
    let mut entries = search.into_archive().into_entries();
    entries.sort_by_key(|e| std::cmp::Reverse(e.goodness));
    let samples = loaded.data.len();
    let rows: Vec<FrontRow> = report::tree_rows(&entries, &loaded.space, samples)
        .into_iter()
        .map(|r| FrontRow::new("archive", r))
        .collect();
    let dir = out_dir(args.out, &loaded.config);
    fs::create_dir_all(&dir).map_err(|e| Failure::config(format!("{}: {e}", dir.display())))?;
    report::write_front(&dir.join(report::FRONT_FILE), &rows).map_err(Failure::config)?;
    eprintln!(
        "{iterations} iterations, archive of {}; wrote {}",
        rows.len(),
        dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn solve(args: SolveArgs) -> Outcome {
    let text = fs::read_to_string(&args.file)
        .map_err(|e| Failure::config(format!("{}: {e}", args.file.display())))?;
    let cnf = parse_dimacs(&text).map_err(Failure::config)?;
    let timeout = seconds(args.timeout)?;
    let result = Solver::Builtin.check_sat(&cnf, timeout);
    let mut stdout = std::io::stdout();
    let print = |out: &mut std::io::Stdout, s: &str| {
        let _ = out.write_all(s.as_bytes());
    };
    match result {
        SolverResult::Sat(model) => {
            print(&mut stdout, &format_answer(Some(&model)));
            Ok(ExitCode::from(10))
        }
        SolverResult::Unsat => {
            print(&mut stdout, &format_answer(None));
            Ok(ExitCode::from(20))
        }
        SolverResult::Timeout => {
            warn!("no answer within {timeout:?}");
            print(&mut stdout, "s UNKNOWN\n");
            Ok(ExitCode::SUCCESS)
        }
        SolverResult::SolverError(msg) => Err(Failure::solver(msg)),
    }
}
