use std::path::{Path, PathBuf};

use anyhow::Context;
use kge_core::train::{Strategy, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::args::TrainArgs;
use crate::exit::ConfigError;

/// Everything a training run needs, after merging file and flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub track: Vec<Strategy>,
    pub checkpoint_every: Option<usize>,
    pub train: TrainConfig,
}

pub fn resolve(args: &TrainArgs) -> anyhow::Result<RunConfig> {
    // run-level keys first; the rest must be hyperparameters
    let mut table = match &args.config {
        Some(path) => read_table(path)?,
        None => toml::Table::new(),
    };
    let mut take = |key: &str| table.remove(key);
    let file_dataset = take("dataset");
    let file_out = take("out");
    let file_track = take("track");
    let file_every = take("checkpoint_every");

    let mut train: TrainConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e| ConfigError(format!("config file: {e}")))?;
    overlay(&mut train, args);

    let dataset = args
        .dataset
        .clone()
        .or(path_value(file_dataset, "dataset")?)
        .ok_or_else(|| {
            ConfigError("no dataset directory given (--dataset or `dataset` in the config)".into())
        })?;
    let out = args
        .out
        .clone()
        .or(path_value(file_out, "out")?)
        .ok_or_else(|| {
            ConfigError("no output directory given (--out or `out` in the config)".into())
        })?;
    let track = if !args.track.is_empty() {
        args.track.clone()
    } else {
        match file_track {
            Some(v) => v
                .try_into()
                .map_err(|e| ConfigError(format!("track: {e}")))?,
            None => Vec::new(),
        }
    };
    if let Some(bad) = track
        .iter()
        .find(|s| !matches!(s, Strategy::Swa | Strategy::Aswa))
    {
        return Err(ConfigError(format!("only swa and aswa can be tracked, not {bad}")).into());
    }
    let checkpoint_every = match args.checkpoint_every {
        Some(n) => Some(n),
        None => match file_every {
            Some(v) => Some(
                v.try_into()
                    .map_err(|e| ConfigError(format!("checkpoint_every: {e}")))?,
            ),
            None => None,
        },
    };
    if checkpoint_every == Some(0) {
        return Err(ConfigError("checkpoint_every must be positive".into()).into());
    }
    train.validate()?;
    Ok(RunConfig {
        dataset,
        out,
        track,
        checkpoint_every,
        train,
    })
}

fn read_table(path: &Path) -> anyhow::Result<toml::Table> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    text.parse::<toml::Table>()
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
}

fn path_value(v: Option<toml::Value>, key: &str) -> anyhow::Result<Option<PathBuf>> {
    match v {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(PathBuf::from(s))),
        Some(other) => Err(ConfigError(format!("{key} must be a string, got {other}")).into()),
    }
}

fn overlay(c: &mut TrainConfig, a: &TrainArgs) {
    fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
        if let Some(v) = src {
            *dst = v.clone();
        }
    }
    set(&mut c.model, &a.model);
    set(&mut c.dim, &a.dim);
    set(&mut c.epochs, &a.epochs);
    set(&mut c.optimizer, &a.optimizer);
    set(&mut c.lr, &a.lr);
    set(&mut c.batch_size, &a.batch_size);
    set(&mut c.strategy, &a.strategy);
    set(&mut c.swa_start, &a.swa_start);
    set(&mut c.seed, &a.seed);
    set(&mut c.smoothing, &a.smoothing);
    if a.val_sample.is_some() {
        c.val_sample = a.val_sample;
    }
    set(&mut c.val_every, &a.val_every);
    set(&mut c.snape_cycles, &a.snape_cycles);
    set(&mut c.snape_defer, &a.snape_defer);
}
