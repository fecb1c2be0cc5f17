use crate::error::{KgeError, Result};
use crate::models::{EmbeddingState, TailScorer};
use crate::scalar::Scalar;

/// Score ensemble of snapshots weighted by inverse training loss.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapshotEnsemble<T> {
    pub snapshots: Vec<EmbeddingState<T>>,
    pub train_losses: Vec<f64>,
    pub weights: Vec<f64>,
}

impl<T: Scalar> SnapshotEnsemble<T> {
    pub fn new() -> Self {
        Self {
            snapshots: Vec::new(),
            train_losses: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn capture(&mut self, theta: &EmbeddingState<T>, train_loss: f64) -> Result<()> {
        if !(train_loss > 0.0 && train_loss.is_finite()) {
            return Err(KgeError::contract(format!(
                "snapshot training loss must be positive and finite, got {train_loss}"
            )));
        }
        if let Some(first) = self.snapshots.first() {
            first.ensure_congruent(theta)?;
        }
        self.snapshots.push(theta.clone());
        self.train_losses.push(train_loss);
        self.weights = inverse_loss_weights(&self.train_losses);
        Ok(())
    }
}

/// `w_i = (1/l_i) / Σ_j (1/l_j)`
fn inverse_loss_weights(losses: &[f64]) -> Vec<f64> {
    let inv: Vec<f64> = losses.iter().map(|l| 1.0 / l).collect();
    let total: f64 = inv.iter().sum();
    inv.into_iter().map(|x| x / total).collect()
}

impl<T: Scalar> TailScorer<T> for SnapshotEnsemble<T> {
    fn num_entities(&self) -> usize {
        self.snapshots
            .first()
            .map_or(0, EmbeddingState::num_entities)
    }

    fn num_relations(&self) -> usize {
        self.snapshots
            .first()
            .map_or(0, EmbeddingState::num_relations)
    }

    fn score_tails_into(&self, h: usize, r: usize, out: &mut [T]) -> Result<()> {
        if self.is_empty() {
            return Err(KgeError::contract("snapshot ensemble is empty"));
        }
        out.fill(T::zero());
        let mut buf = vec![T::zero(); out.len()];
        for (snap, &w) in self.snapshots.iter().zip(&self.weights) {
            snap.score_tails_into(h, r, &mut buf)?;
            let w = T::of(w);
            for (o, &s) in out.iter_mut().zip(&buf) {
                *o += w * s;
            }
        }
        Ok(())
    }
}
