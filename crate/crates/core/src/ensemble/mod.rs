//! Parameter and score ensembles built along a single training trajectory.
//!
//! * [`SwaState`] keeps the running arithmetic mean of every absorbed snapshot.
//! * [`AswaState`] gates the running mean on validation performance: a
//!   snapshot that beats the ensemble replaces it outright (hard update), a
//!   snapshot whose inclusion improves the ensemble is averaged in (soft
//!   update), anything else is rejected.
//! * [`SnapshotEnsemble`] averages the *scores* of snapshots captured at the
//!   end of learning-rate cycles, weighted by inverse training loss.

mod aswa;
mod snape;
mod swa;

pub use aswa::{AswaAction, AswaLogEntry, AswaState};
pub use snape::SnapshotEnsemble;
pub use swa::SwaState;
