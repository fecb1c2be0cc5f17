use rayon::prelude::*;

use super::score::{query_backward, query_vector};
use super::EmbeddingState;
use crate::error::{KgeError, Result};
use crate::kg::KvsAllIndex;
use crate::matrix::Matrix;
use crate::scalar::{axpy, dot, Scalar};

/// Gradient rows for a subset of parameter rows. `ids` is sorted and unique;
/// row `i` of `values` belongs to `ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows<T> {
    pub ids: Vec<usize>,
    pub values: Matrix<T>,
}

impl<T: Scalar> SparseRows<T> {
    pub fn empty(dim: usize) -> Self {
        Self {
            ids: Vec::new(),
            values: Matrix::zeros(0, dim),
        }
    }

    /// Panics unless `ids` is strictly increasing and matches `values`.
    pub fn new(ids: Vec<usize>, values: Matrix<T>) -> Self {
        assert_eq!(ids.len(), values.rows());
        assert!(
            ids.windows(2).all(|w| w[0] < w[1]),
            "ids must be sorted and unique"
        );
        Self { ids, values }
    }

    pub fn get(&self, id: usize) -> Option<&[T]> {
        self.ids.binary_search(&id).ok().map(|i| self.values.row(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[T])> {
        self.ids.iter().copied().zip(self.values.iter_rows())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Loss and gradient of one mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBatch<T> {
    pub loss: T,
    pub entity: SparseRows<T>,
    pub relation: SparseRows<T>,
}

impl<T: Scalar> GradientBatch<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            loss: T::zero(),
            entity: SparseRows::empty(dim),
            relation: SparseRows::empty(dim),
        }
    }
}

/// Binary cross-entropy of `sigmoid(φ(h, r, ·))` against the multi-hot tail
/// labels of each key, averaged over entities and then over keys, with exact
/// gradients for every touched row.
///
/// Labels are smoothed as `y·(1 − ε) + ε/|E|`.
pub fn kvsall_loss_and_grad<T: Scalar>(
    s: &EmbeddingState<T>,
    batch: &[(usize, usize)],
    labels: &KvsAllIndex,
    smoothing: T,
) -> Result<GradientBatch<T>> {
    let dim = s.dim();
    let n = s.num_entities();
    if batch.is_empty() {
        return Ok(GradientBatch::zero(dim));
    }
    if !(smoothing >= T::zero() && smoothing < T::one()) {
        return Err(KgeError::config(format!(
            "label smoothing {smoothing} outside [0, 1)"
        )));
    }
    let mut tails = Vec::with_capacity(batch.len());
    for &(h, r) in batch {
        if h >= n || r >= s.num_relations() {
            return Err(KgeError::contract(format!("key ({h}, {r}) out of range")));
        }
        let ts = labels
            .get(h, r)
            .ok_or_else(|| KgeError::contract(format!("key ({h}, {r}) has no labels")))?;
        tails.push(ts);
    }

    let scale = T::one() / (T::of(batch.len() as f64) * T::of(n as f64));
    let n_t = T::of(n as f64);
    let y_neg = smoothing / n_t;
    let y_pos = T::one() - smoothing + smoothing / n_t;

    // Forward: per key, query vector q and ∂L/∂logits.
    struct KeyPass<T> {
        q: Vec<T>,
        dlogits: Vec<T>,
        loss: T,
    }
    let passes: Vec<KeyPass<T>> = batch
        .par_iter()
        .zip(tails.par_iter())
        .map(|(&(h, r), ts)| {
            let mut q = vec![T::zero(); dim];
            query_vector(s.kind, s.entity.row(h), s.relation.row(r), &mut q);
            let mut dlogits = vec![T::zero(); n];
            let mut loss = T::zero();
            let mut next_pos = ts.iter().peekable();
            for (e, row) in s.entity.iter_rows().enumerate() {
                let z = dot(&q, row);
                let y = if next_pos.peek() == Some(&&e) {
                    next_pos.next();
                    y_pos
                } else {
                    y_neg
                };
                loss -= y * z.log_sigmoid() + (T::one() - y) * (-z).log_sigmoid();
                dlogits[e] = (z.sigmoid() - y) * scale;
            }
            KeyPass { q, dlogits, loss }
        })
        .collect();

    let loss = passes.iter().fold(T::zero(), |acc, p| acc + p.loss) * scale;

    // Tail side: ∂L/∂E[e] = Σ_b g_b[e] · q_b, summed in batch order.
    let mut entity_grad = Matrix::zeros(n, dim);
    entity_grad
        .as_mut_slice()
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(e, out)| {
            for p in &passes {
                axpy(p.dlogits[e], &p.q, out);
            }
        });

    // Query side: ∂L/∂q_b = Σ_e g_b[e] · E[e].
    let dqs: Vec<Vec<T>> = passes
        .par_iter()
        .map(|p| {
            let mut dq = vec![T::zero(); dim];
            for (g, row) in p.dlogits.iter().zip(s.entity.iter_rows()) {
                axpy(*g, row, &mut dq);
            }
            dq
        })
        .collect();

    let mut rel_ids: Vec<usize> = batch.iter().map(|&(_, r)| r).collect();
    rel_ids.sort_unstable();
    rel_ids.dedup();
    let mut relation_grad = Matrix::zeros(rel_ids.len(), dim);
    let mut dh = vec![T::zero(); dim];
    for (&(h, r), dq) in batch.iter().zip(&dqs) {
        let ri = rel_ids.binary_search(&r).unwrap();
        dh.fill(T::zero());
        query_backward(
            s.kind,
            s.entity.row(h),
            s.relation.row(r),
            dq,
            &mut dh,
            relation_grad.row_mut(ri),
        );
        axpy(T::one(), &dh, entity_grad.row_mut(h));
    }

    Ok(GradientBatch {
        loss,
        entity: SparseRows::new((0..n).collect(), entity_grad),
        relation: SparseRows::new(rel_ids, relation_grad),
    })
}
