//! Parameter updates applied to sparse gradient batches.

mod adam;
mod schedule;
mod sgd;

pub use adam::{adam_step, AdamState};
pub use schedule::{cyclic_lr, CyclicSchedule};
pub use sgd::sgd_step;

use crate::error::{KgeError, Result};
use crate::models::{EmbeddingState, GradientBatch, SparseRows};
use crate::scalar::Scalar;

fn check_rows<T: Scalar>(g: &SparseRows<T>, rows: usize, dim: usize, what: &str) -> Result<()> {
    if g.values.cols() != dim && !g.is_empty() {
        return Err(KgeError::contract(format!(
            "{what} gradient width {} differs from parameter width {dim}",
            g.values.cols()
        )));
    }
    if let Some(&last) = g.ids.last() {
        if last >= rows {
            return Err(KgeError::contract(format!(
                "{what} gradient row {last} outside {rows} parameter rows"
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_gradient<T: Scalar>(p: &EmbeddingState<T>, g: &GradientBatch<T>) -> Result<()> {
    check_rows(&g.entity, p.num_entities(), p.dim(), "entity")?;
    check_rows(&g.relation, p.num_relations(), p.dim(), "relation")
}
