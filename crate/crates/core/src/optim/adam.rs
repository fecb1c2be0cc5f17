use super::check_gradient;
use crate::error::{KgeError, Result};
use crate::matrix::Matrix;
use crate::models::{EmbeddingState, GradientBatch, SparseRows};
use crate::scalar::Scalar;

/// Bias-corrected Adam with lazy (row-sparse) moment updates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m_entity: Matrix<T>,
    pub m_relation: Matrix<T>,
    pub v_entity: Matrix<T>,
    pub v_relation: Matrix<T>,
}

impl<T: Scalar> AdamState<T> {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPS: f64 = 1e-8;

    pub fn new(params: &EmbeddingState<T>, lr: f64) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(KgeError::config(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        let (ne, nr, d) = (params.num_entities(), params.num_relations(), params.dim());
        Ok(Self {
            lr,
            beta1: Self::BETA1,
            beta2: Self::BETA2,
            eps: Self::EPS,
            step: 0,
            m_entity: Matrix::zeros(ne, d),
            m_relation: Matrix::zeros(nr, d),
            v_entity: Matrix::zeros(ne, d),
            v_relation: Matrix::zeros(nr, d),
        })
    }

    pub fn is_congruent(&self, params: &EmbeddingState<T>) -> bool {
        self.m_entity.shape() == params.entity.shape()
            && self.v_entity.shape() == params.entity.shape()
            && self.m_relation.shape() == params.relation.shape()
            && self.v_relation.shape() == params.relation.shape()
    }
}

/// One Adam update on the rows present in `g`; the step counter advances once
/// per call even when `g` is empty.
pub fn adam_step<T: Scalar>(
    params: &mut EmbeddingState<T>,
    opt: &mut AdamState<T>,
    g: &GradientBatch<T>,
) -> Result<()> {
    if !opt.is_congruent(params) {
        return Err(KgeError::contract(
            "optimizer state does not match parameter shapes",
        ));
    }
    check_gradient(params, g)?;
    opt.step += 1;
    let t = opt.step as i32;
    let c = Coefficients {
        lr: T::of(opt.lr),
        beta1: T::of(opt.beta1),
        beta2: T::of(opt.beta2),
        eps: T::of(opt.eps),
        bias1: T::one() - T::of(opt.beta1).powi(t),
        bias2: T::one() - T::of(opt.beta2).powi(t),
    };
    update_rows(
        &mut params.entity,
        &mut opt.m_entity,
        &mut opt.v_entity,
        &g.entity,
        &c,
    );
    update_rows(
        &mut params.relation,
        &mut opt.m_relation,
        &mut opt.v_relation,
        &g.relation,
        &c,
    );
    Ok(())
}

struct Coefficients<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    bias1: T,
    bias2: T,
}

fn update_rows<T: Scalar>(
    theta: &mut Matrix<T>,
    m: &mut Matrix<T>,
    v: &mut Matrix<T>,
    g: &SparseRows<T>,
    c: &Coefficients<T>,
) {
    let one = T::one();
    for (id, grad) in g.iter() {
        let (th, mr, vr) = (theta.row_mut(id), m.row_mut(id), v.row_mut(id));
        // Disjoint borrows of three matrices: index by position.
        for k in 0..grad.len() {
            let gk = grad[k];
            mr[k] = c.beta1 * mr[k] + (one - c.beta1) * gk;
            vr[k] = c.beta2 * vr[k] + (one - c.beta2) * gk * gk;
            let m_hat = mr[k] / c.bias1;
            let v_hat = vr[k] / c.bias2;
            th[k] -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
        }
    }
}
