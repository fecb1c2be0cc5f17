use crate::error::Result;
use crate::models::EmbeddingState;
use crate::scalar::Scalar;

/// Running mean of parameter snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SwaState<T> {
    pub theta: EmbeddingState<T>,
    pub n_models: usize,
    /// First epoch (1-based) whose snapshot is absorbed.
    pub start_epoch: usize,
}

impl<T: Scalar> SwaState<T> {
    /// Empty average shaped like `template`; its values are irrelevant until
    /// the first absorb overwrites them.
    pub fn new(template: &EmbeddingState<T>, start_epoch: usize) -> Self {
        Self {
            theta: template.clone(),
            n_models: 0,
            start_epoch,
        }
    }

    /// `Θ_SWA ← (Θ_SWA · n + Θ) / (n + 1)`, then `n ← n + 1`.
    pub fn absorb(&mut self, theta: &EmbeddingState<T>) -> Result<()> {
        self.theta.absorb(theta, self.n_models)?;
        self.n_models += 1;
        Ok(())
    }

    /// Whether the snapshot taken after 1-based `epoch` should be absorbed.
    pub fn is_active(&self, epoch: usize) -> bool {
        epoch >= self.start_epoch
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::models::{init_embeddings, ModelKind};

    fn vec_state(x: &[f64]) -> EmbeddingState<f64> {
        EmbeddingState::new(
            ModelKind::DistMult,
            Matrix::from_rows(&[x.to_vec()]),
            Matrix::from_rows(&[x.to_vec()]),
        )
        .unwrap()
    }

    #[test]
    fn first_absorb_copies() {
        let theta = init_embeddings::<f64>(4, 2, 4, ModelKind::ComplEx, 3).unwrap();
        let zero = EmbeddingState::zeros(ModelKind::ComplEx, 4, 2, 4).unwrap();
        let mut swa = SwaState::new(&zero, 1);
        swa.absorb(&theta).unwrap();
        assert_eq!(swa.theta, theta);
        assert_eq!(swa.n_models, 1);
    }

    #[test]
    fn second_absorb_averages() {
        let mut swa = SwaState::new(&vec_state(&[1.0, 3.0]), 1);
        swa.n_models = 1;
        swa.absorb(&vec_state(&[3.0, 1.0])).unwrap();
        assert_eq!(swa.theta.entity.row(0), &[2.0, 2.0]);
        assert_eq!(swa.n_models, 2);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut swa = SwaState::new(&vec_state(&[1.0, 3.0]), 1);
        assert!(swa.absorb(&vec_state(&[1.0, 2.0, 3.0])).is_err());
        assert_eq!(swa.n_models, 0);
    }
}
