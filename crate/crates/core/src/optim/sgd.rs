use super::check_gradient;
use crate::error::Result;
use crate::models::{EmbeddingState, GradientBatch};
use crate::scalar::{axpy, Scalar};

/// `θ ← θ − η ∇L` on the rows present in `g`.
pub fn sgd_step<T: Scalar>(
    params: &mut EmbeddingState<T>,
    lr: f64,
    g: &GradientBatch<T>,
) -> Result<()> {
    check_gradient(params, g)?;
    let step = -T::of(lr);
    for (id, grad) in g.entity.iter() {
        axpy(step, grad, params.entity.row_mut(id));
    }
    for (id, grad) in g.relation.iter() {
        axpy(step, grad, params.relation.row_mut(id));
    }
    Ok(())
}
