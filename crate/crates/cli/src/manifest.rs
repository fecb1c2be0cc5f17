use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use kge_core::eval::RankingReport;
use kge_core::train::EpochRecord;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReports {
    pub valid: RankingReport,
    pub test: RankingReport,
}

/// Final metrics keyed by model (`running`, `swa`, `aswa`, `snape`).
pub type Reports = BTreeMap<String, SplitReports>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub train_seconds: f64,
    pub eval_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub seed: u64,
    pub num_entities: usize,
    pub num_relations: usize,
    pub epochs: Vec<EpochRecord>,
    pub reports: Reports,
    pub checkpoints: BTreeMap<String, PathBuf>,
    pub timings: Timings,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}
