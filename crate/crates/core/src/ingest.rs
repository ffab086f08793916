//! Benchmark configuration and CSV ingestion.
//!
//! A benchmark is a TOML file naming a CSV of black-box labels, the feature
//! columns to split on (with weights), the label column and the node budget:
//!
//! ```toml
//! dataset = "samples.csv"
//! label = "prediction"
//! budget = 3
//! solver = "builtin"
//!
//! [[feature]]
//! name = "clouds"
//! kind = "categorical"
//! weight = 1
//!
//! [[feature]]
//! name = "speed"
//! kind = "numeric"
//! weight = 2
//!
//! [pipeline]
//! t_overall = 60
//! delta_e = 5
//! ```
//!
//! Categorical values map to branches in order of first appearance (or the
//! declared `categories` order); numeric columns are cut into three equal
//! regions between their observed (or declared) minimum and maximum.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtree::{FunctionSpec, SpaceError, TreeSpace};
use crate::measures::{Dataset, MeasureError, PacParams, Sample};
use crate::pipeline::{CorrectnessSlack, PipelineConfig, PipelineError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}: file is empty")]
    Empty(PathBuf),
    #[error("column `{0}` is not in the dataset header")]
    MissingColumn(String),
    #[error("row {row}: value `{value}` in numeric column `{column}` is not a number")]
    NotNumeric {
        column: String,
        row: usize,
        value: String,
    },
    #[error("row {row}: `{value}` is not a declared category of `{column}`")]
    UnknownCategory {
        column: String,
        row: usize,
        value: String,
    },
    #[error("row {row}: `{value}` is not a declared label")]
    UnknownLabel { row: usize, value: String },
    #[error("numeric column `{column}` needs min < max, got [{min}, {max}]")]
    DegenerateRange { column: String, min: f64, max: f64 },
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("feature `{0}`: weight must be at least 1")]
    ZeroWeight(String),
    #[error("set either delta_c or delta_c_count, not both")]
    ConflictingSlack,
    #[error("invalid duration {0}")]
    BadDuration(f64),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDecl {
    pub name: String,
    pub kind: FeatureKind,
    pub weight: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

/// `[pipeline]` table. Durations are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    #[serde(default = "default_t_overall")]
    pub t_overall: f64,
    #[serde(default)]
    pub t_momcts: Option<f64>,
    #[serde(default)]
    pub delta_c: Option<f64>,
    #[serde(default)]
    pub delta_c_count: Option<u64>,
    #[serde(default = "default_delta_e")]
    pub delta_e: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mcts_iterations: Option<u64>,
    #[serde(default)]
    pub max_sat_queries: Option<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_t_overall() -> f64 {
    300.0
}

fn default_delta_e() -> u64 {
    5
}

fn default_epsilon() -> f64 {
    0.25
}

fn default_delta() -> f64 {
    0.1
}

impl Default for PipelineSection {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

fn seconds(s: f64) -> Result<Duration, IngestError> {
    Duration::try_from_secs_f64(s).map_err(|_| IngestError::BadDuration(s))
}

impl PipelineSection {
    pub fn to_config(&self) -> Result<PipelineConfig, IngestError> {
        let t_overall = seconds(self.t_overall)?;
        let t_momcts = match self.t_momcts {
            Some(t) => seconds(t)?,
            None => t_overall / 2,
        };
        let delta_c = match (self.delta_c, self.delta_c_count) {
            (Some(_), Some(_)) => return Err(IngestError::ConflictingSlack),
            (Some(f), None) => CorrectnessSlack::Fraction(f),
            (None, Some(n)) => CorrectnessSlack::Count(n),
            (None, None) => CorrectnessSlack::Count(10),
        };
        let config = PipelineConfig {
            t_momcts,
            t_overall,
            delta_c,
            delta_e: self.delta_e,
            pac: PacParams::new(self.epsilon, self.delta)?,
            seed: self.seed,
            mcts_iterations: self.mcts_iterations,
            max_sat_queries: self.max_sat_queries,
            ..PipelineConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// CSV path, relative to the config file.
    pub dataset: PathBuf,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub budget: usize,
    #[serde(rename = "feature")]
    pub features: Vec<FeatureDecl>,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl BenchmarkConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, IngestError> {
        let config: Self = toml::from_str(text).map_err(|source| IngestError::Toml {
            path: origin.to_path_buf(),
            source,
        })?;
        config.check()?;
        Ok(config)
    }

    /// Reads the file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::parse(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if config.dataset.is_relative() {
            config.dataset = base.join(&config.dataset);
        }
        if let Some(out) = &config.output {
            if out.is_relative() {
                config.output = Some(base.join(out));
            }
        }
        Ok(config)
    }

    fn check(&self) -> Result<(), IngestError> {
        if self.budget == 0 {
            return Err(IngestError::ZeroBudget);
        }
        for f in &self.features {
            if f.weight == 0 {
                return Err(IngestError::ZeroWeight(f.name.clone()));
            }
        }
        self.pipeline.to_config()?;
        Ok(())
    }
}

/// Region of `value` among three equal parts of `[min, max]`.
pub fn bucketize(value: f64, min: f64, max: f64) -> Result<u16, IngestError> {
    if !(min < max) {
        return Err(IngestError::DegenerateRange {
            column: String::new(),
            min,
            max,
        });
    }
    let step = (max - min) / 3.0;
    Ok(if value < min + step {
        0
    } else if value < min + 2.0 * step {
        1
    } else {
        2
    })
}

/// Index of `value` in `order`, appending it when `open`.
fn intern(order: &mut Vec<String>, value: &str, open: bool) -> Option<usize> {
    if let Some(i) = order.iter().position(|v| v == value) {
        return Some(i);
    }
    if !open {
        return None;
    }
    order.push(value.to_string());
    Some(order.len() - 1)
}

/// Reads the CSV and builds the induced space and dataset.
pub fn load_dataset(config: &BenchmarkConfig) -> Result<(TreeSpace, Dataset), IngestError> {
    let path = &config.dataset;
    let bytes = fs::read(path).map_err(|source| IngestError::Io {
        path: path.clone(),
        source,
    })?;
    parse_dataset(&bytes, path, config)
}

pub fn parse_dataset(
    bytes: &[u8],
    path: &Path,
    config: &BenchmarkConfig,
) -> Result<(TreeSpace, Dataset), IngestError> {
    let csv_err = |source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.is_empty() {
        return Err(IngestError::Empty(path.to_path_buf()));
    }
    let columns: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let find = |name: &str| {
        columns
            .get(name)
            .copied()
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let label_col = find(&config.label)?;
    let feature_cols: Vec<usize> = config
        .features
        .iter()
        .map(|f| find(&f.name))
        .collect::<Result<_, _>>()?;
    let records: Vec<csv::StringRecord> =
        reader.records().collect::<Result<_, _>>().map_err(csv_err)?;
    if records.is_empty() {
        return Err(IngestError::Empty(path.to_path_buf()));
    }

    let mut labels = config.labels.clone().unwrap_or_default();
    let open_labels = config.labels.is_none();
    let mut encoded: Vec<Vec<u16>> = vec![Vec::with_capacity(feature_cols.len()); records.len()];
    let mut functions = Vec::with_capacity(config.features.len());
    for (slot, (decl, &col)) in config.features.iter().zip(&feature_cols).enumerate() {
        let cell = |r: &csv::StringRecord| r.get(col).unwrap_or("").to_string();
        let branches = match decl.kind {
            FeatureKind::Categorical => {
                let mut order = decl.categories.clone().unwrap_or_default();
                let open = decl.categories.is_none();
                for (row, record) in records.iter().enumerate() {
                    let value = cell(record);
                    let idx = intern(&mut order, &value, open).ok_or_else(|| {
                        IngestError::UnknownCategory {
                            column: decl.name.clone(),
                            row: row + 1,
                            value,
                        }
                    })?;
                    encoded[row].push(idx as u16);
                }
                order.len()
            }
            FeatureKind::Numeric => {
                let values: Vec<f64> = records
                    .iter()
                    .enumerate()
                    .map(|(row, r)| {
                        let v = cell(r);
                        v.parse::<f64>().map_err(|_| IngestError::NotNumeric {
                            column: decl.name.clone(),
                            row: row + 1,
                            value: v,
                        })
                    })
                    .collect::<Result<_, _>>()?;
                let min = decl
                    .min
                    .unwrap_or_else(|| values.iter().copied().fold(f64::INFINITY, f64::min));
                let max = decl
                    .max
                    .unwrap_or_else(|| values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                if !(min < max) {
                    return Err(IngestError::DegenerateRange {
                        column: decl.name.clone(),
                        min,
                        max,
                    });
                }
                for (row, v) in values.iter().enumerate() {
                    encoded[row].push(bucketize(*v, min, max)?);
                }
                3
            }
        };
        functions.push(FunctionSpec::new(decl.name.clone(), branches, decl.weight, slot));
    }
    let mut rows = Vec::with_capacity(records.len());
    for (row, (record, features)) in records.iter().zip(encoded).enumerate() {
        let value = record.get(label_col).unwrap_or("");
        let label = intern(&mut labels, value, open_labels).ok_or_else(|| {
            IngestError::UnknownLabel {
                row: row + 1,
                value: value.to_string(),
            }
        })?;
        rows.push(Sample { features, label });
    }
    let space = TreeSpace::new(functions, labels, config.budget)?;
    let data = Dataset::new(&space, rows)?;
    Ok((space, data))
}
