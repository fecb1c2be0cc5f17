//! Knowledge graph embedding training with parameter ensembles.
//!
//! The crate trains DistMult, ComplEx and QMult link predictors with the
//! KvsAll binary cross-entropy objective and builds ensembles along the
//! training trajectory: stochastic weight averaging, its validation-gated
//! adaptive variant, and inverse-loss weighted snapshot score ensembles.
//! Models are evaluated with filtered MRR / Hits@k and applied to multi-hop
//! queries through beam search.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision used by training and evaluation, which is `f64`.

pub mod checkpoint;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod kg;
pub mod matrix;
pub mod models;
pub mod optim;
pub mod queries;
pub mod scalar;
pub mod train;

pub use error::{KgeError, Result};
pub use scalar::Scalar;

/// Precision used for training, ensembles and evaluation.
pub type Real = f64;

pub type Embeddings = models::EmbeddingState<Real>;
pub type Adam = optim::AdamState<Real>;
pub type Gradients = models::GradientBatch<Real>;
pub type Swa = ensemble::SwaState<Real>;
pub type Aswa = ensemble::AswaState<Real>;
pub type SnapE = ensemble::SnapshotEnsemble<Real>;
