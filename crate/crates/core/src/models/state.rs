use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ModelKind;
use crate::error::{KgeError, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Model parameters: one row per entity and one per relation (inverses
/// included). ComplEx rows store all real parts, then all imaginary parts;
/// QMult rows store four contiguous quarters `(1, i, j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState<T> {
    pub kind: ModelKind,
    pub entity: Matrix<T>,
    pub relation: Matrix<T>,
}

impl<T: Scalar> EmbeddingState<T> {
    pub fn new(kind: ModelKind, entity: Matrix<T>, relation: Matrix<T>) -> Result<Self> {
        kind.check_dim(entity.cols())?;
        if entity.cols() != relation.cols() {
            return Err(KgeError::config(format!(
                "entity width {} differs from relation width {}",
                entity.cols(),
                relation.cols()
            )));
        }
        Ok(Self {
            kind,
            entity,
            relation,
        })
    }

    pub fn zeros(
        kind: ModelKind,
        num_entities: usize,
        num_relations: usize,
        dim: usize,
    ) -> Result<Self> {
        Self::new(
            kind,
            Matrix::zeros(num_entities, dim),
            Matrix::zeros(num_relations, dim),
        )
    }

    pub fn dim(&self) -> usize {
        self.entity.cols()
    }

    pub fn num_entities(&self) -> usize {
        self.entity.rows()
    }

    pub fn num_relations(&self) -> usize {
        self.relation.rows()
    }

    /// Same model kind and matrix shapes.
    pub fn is_congruent(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.entity.shape() == other.entity.shape()
            && self.relation.shape() == other.relation.shape()
    }

    pub fn ensure_congruent(&self, other: &Self) -> Result<()> {
        if self.is_congruent(other) {
            Ok(())
        } else {
            Err(KgeError::contract(format!(
                "parameter shapes differ: {} {:?}/{:?} vs {} {:?}/{:?}",
                self.kind,
                self.entity.shape(),
                self.relation.shape(),
                other.kind,
                other.entity.shape(),
                other.relation.shape()
            )))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entity.is_finite() && self.relation.is_finite()
    }

    /// `self ← (self · n + other) / (n + 1)`, element-wise.
    pub fn absorb(&mut self, other: &Self, n: usize) -> Result<()> {
        self.ensure_congruent(other)?;
        let n_t = T::of(n as f64);
        let denom = n_t + T::one();
        for (a, &b) in self
            .entity
            .as_mut_slice()
            .iter_mut()
            .chain(self.relation.as_mut_slice())
            .zip(
                other
                    .entity
                    .as_slice()
                    .iter()
                    .chain(other.relation.as_slice()),
            )
        {
            *a = (*a * n_t + b) / denom;
        }
        Ok(())
    }

    /// Largest absolute element-wise difference over both matrices.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entity
            .max_abs_diff(&other.entity)
            .max(self.relation.max_abs_diff(&other.relation))
    }

    pub fn cast<U: Scalar>(&self) -> EmbeddingState<U> {
        EmbeddingState {
            kind: self.kind,
            entity: self.entity.cast(),
            relation: self.relation.cast(),
        }
    }
}

/// Draws every entry i.i.d. from `U[-√(6/d), √(6/d)]` with a ChaCha8 stream
/// seeded by `seed`; the entity matrix is filled first, row-major.
pub fn init_embeddings<T: Scalar>(
    num_entities: usize,
    num_relations: usize,
    dim: usize,
    kind: ModelKind,
    seed: u64,
) -> Result<EmbeddingState<T>> {
    kind.check_dim(dim)?;
    if num_entities == 0 || num_relations == 0 {
        return Err(KgeError::config(
            "need at least one entity and one relation",
        ));
    }
    let bound = (6.0 / dim as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows: usize| {
        let data = (0..rows * dim)
            .map(|_| T::of(dist.sample(&mut rng)))
            .collect();
        Matrix::from_vec(rows, dim, data)
    };
    let entity = draw(num_entities);
    let relation = draw(num_relations);
    EmbeddingState::new(kind, entity, relation)
}
