//! Two-phase synthesis: a multi-objective tree search proposes a front, then
//! SAT queries either certify each candidate as locally Pareto-optimal or
//! replace it by a tree that dominates it inside the slack window.
//!
//! The run is anytime: whatever has been certified when a deadline hits is
//! returned as `verified`, the unchecked remainder as `best_effort`.

use std::time::{Duration, Instant};

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::cnf::{build_phi, decode, Window};
use crate::dtree::TreeSpace;
use crate::measures::{sample_complexity, Dataset, GoodnessTuple, PacParams};
use crate::momcts::{ArchiveEntry, MctsConfig, Mcts, ParetoArchive};
use crate::momdp::{MoMdp, Restrictions};
use crate::sat::{Solver, SolverResult};

/// Correctness slack, either as a fraction of the sample count or directly
/// as a number of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectnessSlack {
    Fraction(f64),
    Count(u64),
}

impl CorrectnessSlack {
    pub fn to_count(self, samples: usize) -> u64 {
        match self {
            CorrectnessSlack::Fraction(f) => slack_to_counts(f, samples),
            CorrectnessSlack::Count(n) => n,
        }
    }
}

/// `round(delta_c * K)`.
pub fn slack_to_counts(delta_c: f64, samples: usize) -> u64 {
    (delta_c.max(0.0) * samples as f64).round() as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub t_momcts: Duration,
    pub t_overall: Duration,
    pub delta_c: CorrectnessSlack,
    pub delta_e: u64,
    pub pac: PacParams,
    pub seed: u64,
    /// Caps phase 1 by iterations as well as by time.
    pub mcts_iterations: Option<u64>,
    /// Stops phase 2 after this many SAT queries.
    pub max_sat_queries: Option<usize>,
    pub restrictions: Restrictions,
    pub mcts: MctsConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let t_overall = Duration::from_secs(300);
        Self {
            t_momcts: t_overall / 2,
            t_overall,
            // ten samples, i.e. 10/K as a fraction
            delta_c: CorrectnessSlack::Count(10),
            delta_e: 5,
            pac: PacParams::default(),
            seed: 0,
            mcts_iterations: None,
            max_sat_queries: None,
            restrictions: Restrictions::default(),
            mcts: MctsConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("t_momcts ({momcts:?}) exceeds t_overall ({overall:?})")]
    PhaseBudget { momcts: Duration, overall: Duration },
    #[error("correctness slack must be non-negative, got {0}")]
    NegativeSlack(f64),
    #[error("dataset is empty")]
    EmptyDataset,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.t_momcts > self.t_overall {
            return Err(PipelineError::PhaseBudget {
                momcts: self.t_momcts,
                overall: self.t_overall,
            });
        }
        if let CorrectnessSlack::Fraction(f) = self.delta_c {
            if f.is_nan() || f < 0.0 {
                return Err(PipelineError::NegativeSlack(f));
            }
        }
        Ok(())
    }
}

/// One phase-2 query, enough to replay the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub query: usize,
    pub tree: String,
    pub goodness: GoodnessTuple,
    pub window: Window,
    pub result: String,
    pub wall_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replacement: Option<Replacement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replacement {
    pub tree: String,
    pub goodness: GoodnessTuple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "message")]
pub enum Termination {
    /// Every candidate was settled.
    Completed,
    /// The overall deadline hit during phase 2 (or left no phase-2 time).
    Deadline,
    QueryLimit,
    SolverError(String),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub verified: Vec<ArchiveEntry>,
    pub best_effort: Vec<ArchiveEntry>,
    /// Phase-1 archive, before any SAT query.
    pub archive: Vec<ArchiveEntry>,
    pub audit: Vec<AuditRecord>,
    pub termination: Termination,
    pub delta_count: u64,
    pub delta_e: u64,
    pub mcts_iterations: u64,
    pub phase1: Duration,
    pub phase2: Duration,
    /// Hoeffding sample size for the configured PAC parameters.
    pub pac_samples: u64,
}

/// Index of the entry to verify next: most correct first, then most
/// explainable, then smallest tree text.
pub fn pop_order(entries: &[ArchiveEntry], space: &TreeSpace) -> Option<usize> {
    let keyed: Vec<(usize, String)> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (i, space.render(&e.tree)))
        .collect();
    keyed
        .into_iter()
        .max_by(|(a, ta), (b, tb)| {
            let (ga, gb) = (entries[*a].goodness, entries[*b].goodness);
            ga.correct
                .cmp(&gb.correct)
                .then(ga.explainability.cmp(&gb.explainability))
                .then(tb.cmp(ta))
        })
        .map(|(i, _)| i)
}

/// Runs both phases with `solver` answering the SAT queries.
pub fn run(
    space: &TreeSpace,
    data: &Dataset,
    config: &PipelineConfig,
    solver: &Solver,
) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    if data.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let samples = data.len();
    let pac_samples = sample_complexity(space, config.pac);
    if (samples as u64) < pac_samples {
        warn!(
            "{samples} samples is below the {pac_samples} needed for epsilon={} delta={}",
            config.pac.epsilon(),
            config.pac.delta()
        );
    }

    let start = Instant::now();
    let mdp = MoMdp::new(space, data, config.restrictions);
    let mcts_config = MctsConfig {
        seed: config.seed,
        max_iterations: config.mcts_iterations,
        ..config.mcts.clone()
    };
    let mut search = Mcts::new(&mdp, mcts_config);
    search.run_until(start + config.t_momcts);
    let mcts_iterations = search.iterations();
    let archive = search.into_archive();
    let phase1 = start.elapsed();
    info!(
        "phase 1: {} iterations, {} candidates in {:.2?}",
        mcts_iterations,
        archive.len(),
        phase1
    );

    let delta_count = config.delta_c.to_count(samples);
    let phase2_start = Instant::now();
    let deadline = phase2_start + config.t_overall.saturating_sub(config.t_momcts);
    let mut state = PhaseTwo {
        space,
        data,
        solver,
        delta_count,
        delta_e: config.delta_e,
        pending: archive.clone(),
        verified: ParetoArchive::new(),
        audit: Vec::new(),
    };
    let termination = state.run(deadline, config.max_sat_queries);
    let phase2 = phase2_start.elapsed();
    info!(
        "phase 2: {} queries, {} verified, {} unchecked, {:?}",
        state.audit.len(),
        state.verified.len(),
        state.pending.len(),
        termination
    );
    Ok(RunOutput {
        verified: sorted(state.verified),
        best_effort: sorted(state.pending),
        archive: sorted(archive),
        audit: state.audit,
        termination,
        delta_count,
        delta_e: config.delta_e,
        mcts_iterations,
        phase1,
        phase2,
        pac_samples,
    })
}

fn sorted(archive: ParetoArchive) -> Vec<ArchiveEntry> {
    let mut entries = archive.into_entries();
    entries.sort_by_key(|e| std::cmp::Reverse(e.goodness));
    entries
}

struct PhaseTwo<'a> {
    space: &'a TreeSpace,
    data: &'a Dataset,
    solver: &'a Solver,
    delta_count: u64,
    delta_e: u64,
    pending: ParetoArchive,
    verified: ParetoArchive,
    audit: Vec<AuditRecord>,
}

impl PhaseTwo<'_> {
    fn run(&mut self, deadline: Instant, max_queries: Option<usize>) -> Termination {
        loop {
            let Some(index) = pop_order(self.pending.entries(), self.space) else {
                return Termination::Completed;
            };
            if max_queries.is_some_and(|m| self.audit.len() >= m) {
                return Termination::QueryLimit;
            }
            let now = Instant::now();
            if now >= deadline {
                return Termination::Deadline;
            }
            let entry = self.pending.remove(index);
            if let Some(stop) = self.check(entry, deadline - now) {
                return stop;
            }
            debug_assert!(self.verified.is_antichain());
            debug_assert!(self.slack_invariant());
        }
    }

    /// Settles one candidate; returns a termination reason if the loop must
    /// stop.
    fn check(&mut self, entry: ArchiveEntry, budget: Duration) -> Option<Termination> {
        let g = entry.goodness;
        let window = Window::above(
            g,
            self.delta_count,
            self.delta_e,
            self.data.len(),
            self.space.max_explainability(),
        );
        let tree_text = self.space.render(&entry.tree);
        let started = Instant::now();
        let instance = build_phi(self.space, self.data, window).expect("budget is at least 1");
        let result = self.solver.check_sat(&instance.cnf, budget);
        let mut record = AuditRecord {
            query: self.audit.len(),
            tree: tree_text,
            goodness: g,
            window,
            result: result.label().to_string(),
            wall_ms: 0.0,
            replacement: None,
            message: None,
        };
        let stop = match result {
            SolverResult::Unsat => {
                debug!("{} is locally Pareto-optimal", record.tree);
                self.verified.insert(entry.tree, g);
                self.prune();
                None
            }
            SolverResult::Sat(model) => match decode(&model, &instance, self.space, self.data) {
                Ok((better, g2)) => {
                    debug!("{} replaced by {} {}", record.tree, self.space.render(&better), g2);
                    record.replacement = Some(Replacement {
                        tree: self.space.render(&better),
                        goodness: g2,
                    });
                    self.pending.insert(better, g2);
                    self.prune();
                    None
                }
                Err(e) => {
                    let msg = format!("undecodable model: {e}");
                    record.message = Some(msg.clone());
                    self.pending.insert(entry.tree, g);
                    Some(Termination::SolverError(msg))
                }
            },
            SolverResult::Timeout => {
                self.pending.insert(entry.tree, g);
                Some(Termination::Deadline)
            }
            SolverResult::SolverError(msg) => {
                record.message = Some(msg.clone());
                self.pending.insert(entry.tree, g);
                Some(Termination::SolverError(msg))
            }
        };
        record.wall_ms = started.elapsed().as_secs_f64() * 1e3;
        self.audit.push(record);
        stop
    }

    /// Drops pending candidates that a verified tree already covers.
    fn prune(&mut self) {
        let verified = &self.verified;
        self.pending.extract_if(|e| verified.covers(&e.goodness));
    }

    /// No pending candidate sits inside a verified tree's slack window.
    fn slack_invariant(&self) -> bool {
        self.verified.entries().iter().all(|v| {
            let w = Window::above(
                v.goodness,
                self.delta_count,
                self.delta_e,
                self.data.len(),
                self.space.max_explainability(),
            );
            !self.pending.entries().iter().any(|p| w.admits(&p.goodness))
        })
    }
}

/// Text and goodness of each entry, for comparisons and output.
pub fn describe(entries: &[ArchiveEntry], space: &TreeSpace) -> Vec<(String, GoodnessTuple)> {
    entries
        .iter()
        .map(|e| (space.render(&e.tree), e.goodness))
        .collect()
}
