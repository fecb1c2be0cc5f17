//! Bilinear scoring models (DistMult, ComplEx, QMult), the KvsAll forward
//! pass and its analytic gradients.
//!
//! All three models are linear in the tail embedding: `φ(h, r, t) = q(h, r) · t`
//! where the query vector `q` is the element-wise real, complex or Hamilton
//! product of the head and relation rows. Scoring every tail at once is then a
//! single matrix-vector product against the entity matrix.

mod kind;
mod loss;
mod score;
mod state;

pub use kind::ModelKind;
pub use loss::{kvsall_loss_and_grad, GradientBatch, SparseRows};
pub use score::{query_backward, query_vector, score_all_tails, score_triple, ScoreRow};
pub use state::{init_embeddings, EmbeddingState};

use crate::error::Result;
use crate::scalar::Scalar;

/// Anything that can produce logits for every tail of a `(head, relation)`
/// query. Implemented by single models and by score ensembles.
pub trait TailScorer<T: Scalar>: Sync {
    fn num_entities(&self) -> usize;

    /// Relation rows, inverses included.
    fn num_relations(&self) -> usize;

    /// Writes `φ(h, r, e)` for every entity `e` into `out`.
    fn score_tails_into(&self, h: usize, r: usize, out: &mut [T]) -> Result<()>;

    fn score_tails(&self, h: usize, r: usize) -> Result<ScoreRow<T>> {
        let mut logits = vec![T::zero(); self.num_entities()];
        self.score_tails_into(h, r, &mut logits)?;
        Ok(ScoreRow { logits })
    }
}

impl<T: Scalar> TailScorer<T> for EmbeddingState<T> {
    fn num_entities(&self) -> usize {
        self.entity.rows()
    }

    fn num_relations(&self) -> usize {
        self.relation.rows()
    }

    fn score_tails_into(&self, h: usize, r: usize, out: &mut [T]) -> Result<()> {
        score::score_all_tails_into(self, h, r, out)
    }
}

impl<T: Scalar, S: TailScorer<T> + ?Sized> TailScorer<T> for &S {
    fn num_entities(&self) -> usize {
        (**self).num_entities()
    }

    fn num_relations(&self) -> usize {
        (**self).num_relations()
    }

    fn score_tails_into(&self, h: usize, r: usize, out: &mut [T]) -> Result<()> {
        (**self).score_tails_into(h, r, out)
    }
}
