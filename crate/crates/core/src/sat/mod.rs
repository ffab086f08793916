//! SAT solving boundary: DIMACS serialization and three backends.
//!
//! * `External` runs `<program> <file.cnf>` and reads the competition output
//!   format (`s ...` / `v ...` lines, exit codes 10 and 20). On deadline the
//!   solver's process group is killed.
//! * `Builtin` solves in-process with a CDCL solver on a worker thread. On
//!   deadline the worker is abandoned and finishes in the background.
//! * `Dpll` is a tiny fallback for instances of at most 50 variables.
//!
//! Every model is checked against the clauses before it is returned.

mod dimacs;
mod dpll;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use crate::cnf::{Assignment, Cnf, Lit};

pub use dimacs::{
    emit_dimacs, format_answer, parse_dimacs, parse_solver_output, DimacsError, SolverAnswer,
};
pub use dpll::DPLL_MAX_VARS;

/// Environment variable that overrides the configured solver.
pub const SOLVER_ENV: &str = "LPO_SOLVER";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverResult {
    Sat(Assignment),
    Unsat,
    Timeout,
    SolverError(String),
}

impl SolverResult {
    pub fn label(&self) -> &'static str {
        match self {
            SolverResult::Sat(_) => "sat",
            SolverResult::Unsat => "unsat",
            SolverResult::Timeout => "timeout",
            SolverResult::SolverError(_) => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solver {
    Builtin,
    Dpll,
    External { program: PathBuf, args: Vec<String> },
}

impl Default for Solver {
    fn default() -> Self {
        Solver::External {
            program: "kissat".into(),
            args: Vec::new(),
        }
    }
}

impl Solver {
    /// `builtin`, `dpll`, or a command line (program followed by arguments,
    /// whitespace separated) for an external solver.
    pub fn from_spec(spec: &str) -> Self {
        match spec.trim() {
            "builtin" => Solver::Builtin,
            "dpll" => Solver::Dpll,
            other => {
                let mut parts = other.split_whitespace();
                let program = parts.next().unwrap_or("kissat").into();
                Solver::External {
                    program,
                    args: parts.map(String::from).collect(),
                }
            }
        }
    }

    /// The configured solver unless the environment overrides it.
    pub fn from_env_or(spec: &str) -> Self {
        match std::env::var(SOLVER_ENV) {
            Ok(v) if !v.trim().is_empty() => Self::from_spec(&v),
            _ => Self::from_spec(spec),
        }
    }

    pub fn check_sat(&self, cnf: &Cnf, timeout: Duration) -> SolverResult {
        if timeout.is_zero() {
            return SolverResult::Timeout;
        }
        let result = match self {
            Solver::Builtin => solve_builtin(cnf, timeout),
            Solver::Dpll => {
                if cnf.num_vars() > DPLL_MAX_VARS {
                    return SolverResult::SolverError(format!(
                        "dpll fallback handles at most {DPLL_MAX_VARS} variables, instance has {}",
                        cnf.num_vars()
                    ));
                }
                match dpll::solve(cnf, Instant::now() + timeout) {
                    dpll::Outcome::Sat(m) => SolverResult::Sat(m),
                    dpll::Outcome::Unsat => SolverResult::Unsat,
                    dpll::Outcome::Timeout => SolverResult::Timeout,
                }
            }
            Solver::External { program, args } => solve_external(program, args, cnf, timeout),
        };
        match result {
            SolverResult::Sat(model) if !model.satisfies(cnf) => {
                SolverResult::SolverError("solver returned a model that violates a clause".into())
            }
            other => other,
        }
    }
}

/// Solves with the given backend; see [`Solver::check_sat`].
pub fn check_sat(solver: &Solver, cnf: &Cnf, timeout: Duration) -> SolverResult {
    solver.check_sat(cnf, timeout)
}

fn solve_builtin(cnf: &Cnf, timeout: Duration) -> SolverResult {
    if cnf.has_empty_clause() {
        return SolverResult::Unsat;
    }
    let num_vars = cnf.num_vars();
    use varisat::ExtendFormula;
    let mut formula = varisat::CnfFormula::new();
    formula.set_var_count(num_vars as usize);
    for clause in cnf.clauses() {
        let lits: Vec<varisat::Lit> = clause
            .iter()
            .map(|l| varisat::Lit::from_dimacs(l.to_dimacs() as isize))
            .collect();
        formula.add_clause(&lits);
    }
    let (tx, rx) = mpsc::channel();
    let worker = thread::spawn(move || {
        let mut solver = varisat::Solver::new();
        solver.add_formula(&formula);
        let outcome = match solver.solve() {
            Ok(true) => {
                let lits = solver.model().unwrap_or_default();
                let model = Assignment::from_lits(
                    num_vars,
                    lits.into_iter()
                        .map(|l| Lit::from_dimacs(l.to_dimacs() as i32)),
                );
                SolverResult::Sat(model)
            }
            Ok(false) => SolverResult::Unsat,
            Err(e) => SolverResult::SolverError(e.to_string()),
        };
        let _ = tx.send(outcome);
    });
    match rx.recv_timeout(timeout) {
        Ok(result) => {
            let _ = worker.join();
            result
        }
        Err(mpsc::RecvTimeoutError::Timeout) => SolverResult::Timeout,
        Err(mpsc::RecvTimeoutError::Disconnected) => {
            SolverResult::SolverError("builtin solver thread panicked".into())
        }
    }
}

#[cfg(unix)]
fn kill_group(child: &mut std::process::Child) {
    // negative pid addresses the whole process group
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_group(child: &mut std::process::Child) {
    let _ = child.kill();
}

fn solve_external(
    program: &PathBuf,
    args: &[String],
    cnf: &Cnf,
    timeout: Duration,
) -> SolverResult {
    let deadline = Instant::now() + timeout;
    let mut file = match tempfile::Builder::new().suffix(".cnf").tempfile() {
        Ok(f) => f,
        Err(e) => return SolverResult::SolverError(format!("cannot create temp file: {e}")),
    };
    if let Err(e) = file.write_all(&emit_dimacs(cnf)).and_then(|_| file.flush()) {
        return SolverResult::SolverError(format!("cannot write DIMACS: {e}"));
    }
    let mut command = Command::new(program);
    command
        .args(args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        command.process_group(0);
    }
    let mut child = match command.spawn() {
        Ok(c) => c,
        Err(e) => {
            return SolverResult::SolverError(format!(
                "cannot run solver `{}`: {e}",
                program.display()
            ))
        }
    };
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if Instant::now() >= deadline {
                    kill_group(&mut child);
                    let _ = child.wait();
                    let _ = reader.join();
                    return SolverResult::Timeout;
                }
                thread::sleep(Duration::from_millis(2));
            }
            Err(e) => return SolverResult::SolverError(format!("waiting for solver: {e}")),
        }
    };
    let output = reader.join().unwrap_or_default();
    let parsed = match parse_solver_output(&output) {
        Ok(p) => p,
        Err(e) => return SolverResult::SolverError(e),
    };
    match (parsed, status.code()) {
        (Some(SolverAnswer::Sat(lits)), _) => {
            SolverResult::Sat(Assignment::from_lits(cnf.num_vars(), lits))
        }
        (Some(SolverAnswer::Unsat), _) => SolverResult::Unsat,
        (Some(SolverAnswer::Unknown), _) => SolverResult::Timeout,
        (None, Some(20)) => SolverResult::Unsat,
        (None, code) => SolverResult::SolverError(format!(
            "solver exited with {code:?} without a status line"
        )),
    }
}
