use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use kge_core::kg::Split;
use kge_core::models::ModelKind;
use kge_core::queries::{QueryType, TNorm};
use kge_core::train::{OptimizerKind, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "kge",
    version,
    about = "Knowledge graph embeddings with SWA/ASWA parameter ensembles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and its ensemble.
    Train(TrainArgs),
    /// Filtered link-prediction metrics for a checkpoint.
    Eval(EvalArgs),
    /// Answer multi-hop queries with beam search.
    Answer(AnswerArgs),
    /// Sample multi-hop queries from a dataset.
    GenQueries(GenArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// TOML file with any of the settings below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory holding train.txt, valid.txt and test.txt.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Output directory for checkpoints, logs and the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scoring function: distmult, complex or qmult.
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Embedding width in real coordinates.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// adam or sgd.
    #[arg(long)]
    pub optimizer: Option<OptimizerKind>,
    /// Learning rate (peak rate for snape).
    #[arg(long)]
    pub lr: Option<f64>,
    /// KvsAll keys per batch.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Ensemble strategy: none, swa, aswa or snape.
    #[arg(long)]
    pub strategy: Option<Strategy>,
    /// First epoch (1-based) absorbed into the swa average.
    #[arg(long)]
    pub swa_start: Option<usize>,
    /// Seed for initialisation, shuffling and validation sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Label smoothing in [0, 1).
    #[arg(long)]
    pub smoothing: Option<f64>,
    /// Validate on this many sampled triples instead of the whole split.
    #[arg(long)]
    pub val_sample: Option<usize>,
    /// Validate every this many epochs.
    #[arg(long)]
    pub val_every: Option<usize>,
    /// Learning-rate cycles, one snapshot per cycle.
    #[arg(long)]
    pub snape_cycles: Option<usize>,
    /// Fraction of epochs trained at constant rate before cycling.
    #[arg(long)]
    pub snape_defer: Option<f64>,
    /// Also track these averages (swa, aswa) next to the main strategy.
    #[arg(long, value_delimiter = ',')]
    pub track: Vec<Strategy>,
    /// Write checkpoints every this many epochs as well as at the end.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Continue from the checkpoints already in the output directory.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = Split::Test)]
    pub split: Split,
    /// Vocabulary the checkpoint was trained with; defaults to vocab.json
    /// next to the checkpoint when present.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Write `h,r,t,direction,rank` for every ranked query.
    #[arg(long)]
    pub ranks_csv: Option<PathBuf>,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnswerArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// JSON-lines query file.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub beam_width: usize,
    #[arg(long, default_value = "product")]
    pub tnorm: TNorm,
    /// Vocabulary the checkpoint was trained with; defaults to vocab.json
    /// next to the checkpoint when present.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Write `query,type,answer,rank` for every hard answer.
    #[arg(long)]
    pub rankings_csv: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Query types to generate; all eight by default.
    #[arg(long, value_delimiter = ',')]
    pub types: Vec<QueryType>,
    /// Queries per type.
    #[arg(long, default_value_t = 500)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON-lines output; the vocabulary is written next to it as
    /// `<stem>.vocab.json`.
    #[arg(long)]
    pub output: PathBuf,
}
