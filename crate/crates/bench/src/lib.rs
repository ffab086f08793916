//! Shared inputs for the criterion benchmarks under `benches/`.

use std::path::{Path, PathBuf};

use lpo_core::ingest::{load_dataset, BenchmarkConfig};
use lpo_core::{Dataset, TreeSpace};

/// Path of a bundled benchmark configuration, e.g. `"rand3x2"`.
pub fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../benchmarks")
        .join(name)
        .join(format!("{name}.toml"))
}

pub fn load(name: &str) -> (TreeSpace, Dataset) {
    let config = BenchmarkConfig::load(&config_path(name)).expect("bundled config loads");
    load_dataset(&config).expect("bundled dataset loads")
}
