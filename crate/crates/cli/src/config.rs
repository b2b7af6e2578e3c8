//! Config file model: one JSON document with a `common` block plus one block
//! per experiment. Unknown keys anywhere are rejected so parameter-name
//! typos fail loudly instead of silently running defaults.

use std::path::Path;

use geodev_core::applications::{
    DuffingExperimentConfig, OptimizerConfig, WellExperimentConfig,
};
use geodev_core::{GeodevError, Result, Scheme};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommonConfig {
    /// Fallback seed when an experiment block does not pin one.
    pub seed: Option<u64>,
    /// Cap on ensemble parallelism; `GEODEV_THREADS` overrides it.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub common: CommonConfig,
    pub well: WellExperimentConfig,
    pub duffing: DuffingExperimentConfig,
    pub optimize: OptimizerConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            GeodevError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| GeodevError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flag overrides applied on top of the file config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub scheme: Option<Scheme>,
}

impl Overrides {
    /// Resolution order for the seed: flag, then experiment block, then
    /// common block, then 0.
    pub fn resolve_seed(&self, sim_seed: Option<u64>, common: &CommonConfig) -> u64 {
        self.seed.or(sim_seed).or(common.seed).unwrap_or(0)
    }
}
