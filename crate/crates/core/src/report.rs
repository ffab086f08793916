//! Output files of a run, and readers for them.
//!
//! * `verified.csv`, `best_effort.csv`:
//!   `correctness_fraction,correctness_count,explainability,tree`
//! * `front.csv`: the same columns prefixed by `set`
//! * `audit.jsonl`: one SAT query per line
//! * `summary.json`: termination reason, slacks and timings

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtree::TreeSpace;
use crate::measures::GoodnessTuple;
use crate::momcts::ArchiveEntry;
use crate::pipeline::{AuditRecord, RunOutput, Termination};

pub const VERIFIED_FILE: &str = "verified.csv";
pub const BEST_EFFORT_FILE: &str = "best_effort.csv";
pub const FRONT_FILE: &str = "front.csv";
pub const AUDIT_FILE: &str = "audit.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRow {
    pub correctness_fraction: f64,
    pub correctness_count: u64,
    pub explainability: u64,
    pub tree: String,
}

impl TreeRow {
    pub fn new(entry: &ArchiveEntry, space: &TreeSpace, samples: usize) -> Self {
        Self {
            correctness_fraction: entry.goodness.fraction(samples),
            correctness_count: entry.goodness.correct,
            explainability: entry.goodness.explainability,
            tree: space.render(&entry.tree),
        }
    }

    pub fn goodness(&self) -> GoodnessTuple {
        GoodnessTuple::new(self.correctness_count, self.explainability)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub set: String,
    pub correctness_fraction: f64,
    pub correctness_count: u64,
    pub explainability: u64,
    pub tree: String,
}

impl FrontRow {
    pub fn new(set: &str, row: TreeRow) -> Self {
        Self {
            set: set.to_string(),
            correctness_fraction: row.correctness_fraction,
            correctness_count: row.correctness_count,
            explainability: row.explainability,
            tree: row.tree,
        }
    }

    pub fn goodness(&self) -> GoodnessTuple {
        GoodnessTuple::new(self.correctness_count, self.explainability)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub termination: Termination,
    pub samples: usize,
    pub pac_samples: u64,
    pub delta_count: u64,
    pub delta_e: u64,
    pub mcts_iterations: u64,
    pub sat_queries: usize,
    pub phase1_secs: f64,
    pub phase2_secs: f64,
    pub verified: usize,
    pub best_effort: usize,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn tree_rows(entries: &[ArchiveEntry], space: &TreeSpace, samples: usize) -> Vec<TreeRow> {
    entries
        .iter()
        .map(|e| TreeRow::new(e, space, samples))
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    // header written explicitly so empty files still carry it
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

const TREE_HEADER: [&str; 4] = [
    "correctness_fraction",
    "correctness_count",
    "explainability",
    "tree",
];
const FRONT_HEADER: [&str; 5] = [
    "set",
    "correctness_fraction",
    "correctness_count",
    "explainability",
    "tree",
];

pub fn write_tree_rows(path: &Path, rows: &[TreeRow]) -> Result<(), ReportError> {
    write_csv(path, rows, &TREE_HEADER)
}

pub fn write_front(path: &Path, rows: &[FrontRow]) -> Result<(), ReportError> {
    write_csv(path, rows, &FRONT_HEADER)
}

pub fn read_tree_rows(path: &Path) -> Result<Vec<TreeRow>, ReportError> {
    read_csv(path)
}

pub fn read_front(path: &Path) -> Result<Vec<FrontRow>, ReportError> {
    read_csv(path)
}

pub fn write_audit(path: &Path, audit: &[AuditRecord]) -> Result<(), ReportError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for record in audit {
        let line = serde_json::to_string(record).expect("audit records serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_audit(path: &Path) -> Result<Vec<AuditRecord>, ReportError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| ReportError::Json {
            path: path.to_path_buf(),
            line: n + 1,
            source,
        })?);
    }
    Ok(out)
}

pub fn summary(out: &RunOutput, samples: usize) -> Summary {
    Summary {
        termination: out.termination.clone(),
        samples,
        pac_samples: out.pac_samples,
        delta_count: out.delta_count,
        delta_e: out.delta_e,
        mcts_iterations: out.mcts_iterations,
        sat_queries: out.audit.len(),
        phase1_secs: out.phase1.as_secs_f64(),
        phase2_secs: out.phase2.as_secs_f64(),
        verified: out.verified.len(),
        best_effort: out.best_effort.len(),
    }
}

/// Writes every output file of a run into `dir`, creating it if needed.
pub fn write_run(
    dir: &Path,
    space: &TreeSpace,
    samples: usize,
    out: &RunOutput,
) -> Result<(), ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let verified = tree_rows(&out.verified, space, samples);
    let best = tree_rows(&out.best_effort, space, samples);
    write_tree_rows(&dir.join(VERIFIED_FILE), &verified)?;
    write_tree_rows(&dir.join(BEST_EFFORT_FILE), &best)?;
    let front: Vec<FrontRow> = verified
        .into_iter()
        .map(|r| FrontRow::new("verified", r))
        .chain(best.into_iter().map(|r| FrontRow::new("best_effort", r)))
        .collect();
    write_front(&dir.join(FRONT_FILE), &front)?;
    write_audit(&dir.join(AUDIT_FILE), &out.audit)?;
    let path = dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary(out, samples)).expect("summary serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))
}
