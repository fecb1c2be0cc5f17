use std::ops::Deref;

use super::{EmbeddingState, ModelKind};
use crate::error::{KgeError, Result};
use crate::scalar::{dot, Scalar};

/// Logits `φ(h, r, ·)` over all entities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow<T> {
    pub logits: Vec<T>,
}

impl<T> Deref for ScoreRow<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.logits
    }
}

fn check_ids<T: Scalar>(s: &EmbeddingState<T>, h: usize, r: usize) -> Result<()> {
    if h >= s.num_entities() {
        return Err(KgeError::Index {
            what: "entity",
            index: h,
            limit: s.num_entities(),
        });
    }
    if r >= s.num_relations() {
        return Err(KgeError::Index {
            what: "relation",
            index: r,
            limit: s.num_relations(),
        });
    }
    Ok(())
}

/// Scores a single triple directly from the model definition.
pub fn score_triple<T: Scalar>(s: &EmbeddingState<T>, h: usize, r: usize, t: usize) -> Result<T> {
    check_ids(s, h, r)?;
    if t >= s.num_entities() {
        return Err(KgeError::Index {
            what: "entity",
            index: t,
            limit: s.num_entities(),
        });
    }
    let (eh, wr, et) = (s.entity.row(h), s.relation.row(r), s.entity.row(t));
    let d = s.dim();
    let score = match s.kind {
        ModelKind::DistMult => (0..d).map(|k| eh[k] * wr[k] * et[k]).sum(),
        ModelKind::ComplEx => {
            // Re(h · r · conj(t))
            let m = d / 2;
            (0..m)
                .map(|k| {
                    let (hr, hi) = (eh[k], eh[k + m]);
                    let (rr, ri) = (wr[k], wr[k + m]);
                    let (tr, ti) = (et[k], et[k + m]);
                    let pr = hr * rr - hi * ri;
                    let pi = hr * ri + hi * rr;
                    pr * tr + pi * ti
                })
                .sum()
        }
        ModelKind::QMult => {
            // (h ⊗ r) · t
            let m = d / 4;
            (0..m)
                .map(|k| {
                    let p = hamilton(
                        [eh[k], eh[k + m], eh[k + 2 * m], eh[k + 3 * m]],
                        [wr[k], wr[k + m], wr[k + 2 * m], wr[k + 3 * m]],
                    );
                    p[0] * et[k] + p[1] * et[k + m] + p[2] * et[k + 2 * m] + p[3] * et[k + 3 * m]
                })
                .sum()
        }
    };
    Ok(score)
}

#[inline]
fn hamilton<T: Scalar>([a1, b1, c1, d1]: [T; 4], [a2, b2, c2, d2]: [T; 4]) -> [T; 4] {
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

/// Writes the query vector `q(h, r)` with `φ(h, r, t) = q · t`.
pub fn query_vector<T: Scalar>(kind: ModelKind, eh: &[T], wr: &[T], q: &mut [T]) {
    let d = eh.len();
    match kind {
        ModelKind::DistMult => {
            for k in 0..d {
                q[k] = eh[k] * wr[k];
            }
        }
        ModelKind::ComplEx => {
            let m = d / 2;
            for k in 0..m {
                let (hr, hi, rr, ri) = (eh[k], eh[k + m], wr[k], wr[k + m]);
                q[k] = hr * rr - hi * ri;
                q[k + m] = hr * ri + hi * rr;
            }
        }
        ModelKind::QMult => {
            let m = d / 4;
            for k in 0..m {
                let p = hamilton(
                    [eh[k], eh[k + m], eh[k + 2 * m], eh[k + 3 * m]],
                    [wr[k], wr[k + m], wr[k + 2 * m], wr[k + 3 * m]],
                );
                q[k] = p[0];
                q[k + m] = p[1];
                q[k + 2 * m] = p[2];
                q[k + 3 * m] = p[3];
            }
        }
    }
}

/// Back-propagates `dq = ∂L/∂q` through [`query_vector`], accumulating into
/// `dh` and `dr`.
pub fn query_backward<T: Scalar>(
    kind: ModelKind,
    eh: &[T],
    wr: &[T],
    dq: &[T],
    dh: &mut [T],
    dr: &mut [T],
) {
    let d = eh.len();
    match kind {
        ModelKind::DistMult => {
            for k in 0..d {
                dh[k] += dq[k] * wr[k];
                dr[k] += dq[k] * eh[k];
            }
        }
        ModelKind::ComplEx => {
            let m = d / 2;
            for k in 0..m {
                let (hr, hi, rr, ri) = (eh[k], eh[k + m], wr[k], wr[k + m]);
                let (gr, gi) = (dq[k], dq[k + m]);
                dh[k] += gr * rr + gi * ri;
                dh[k + m] += -gr * ri + gi * rr;
                dr[k] += gr * hr + gi * hi;
                dr[k + m] += -gr * hi + gi * hr;
            }
        }
        ModelKind::QMult => {
            let m = d / 4;
            for k in 0..m {
                let (a1, b1, c1, d1) = (eh[k], eh[k + m], eh[k + 2 * m], eh[k + 3 * m]);
                let (a2, b2, c2, d2) = (wr[k], wr[k + m], wr[k + 2 * m], wr[k + 3 * m]);
                let (g0, g1, g2, g3) = (dq[k], dq[k + m], dq[k + 2 * m], dq[k + 3 * m]);
                dh[k] += g0 * a2 + g1 * b2 + g2 * c2 + g3 * d2;
                dh[k + m] += -g0 * b2 + g1 * a2 - g2 * d2 + g3 * c2;
                dh[k + 2 * m] += -g0 * c2 + g1 * d2 + g2 * a2 - g3 * b2;
                dh[k + 3 * m] += -g0 * d2 - g1 * c2 + g2 * b2 + g3 * a2;
                dr[k] += g0 * a1 + g1 * b1 + g2 * c1 + g3 * d1;
                dr[k + m] += -g0 * b1 + g1 * a1 + g2 * d1 - g3 * c1;
                dr[k + 2 * m] += -g0 * c1 - g1 * d1 + g2 * a1 + g3 * b1;
                dr[k + 3 * m] += -g0 * d1 + g1 * c1 - g2 * b1 + g3 * a1;
            }
        }
    }
}

pub(crate) fn score_all_tails_into<T: Scalar>(
    s: &EmbeddingState<T>,
    h: usize,
    r: usize,
    out: &mut [T],
) -> Result<()> {
    check_ids(s, h, r)?;
    if out.len() != s.num_entities() {
        return Err(KgeError::contract(format!(
            "score buffer has {} slots for {} entities",
            out.len(),
            s.num_entities()
        )));
    }
    let mut q = vec![T::zero(); s.dim()];
    query_vector(s.kind, s.entity.row(h), s.relation.row(r), &mut q);
    for (o, row) in out.iter_mut().zip(s.entity.iter_rows()) {
        *o = dot(&q, row);
    }
    Ok(())
}

pub fn score_all_tails<T: Scalar>(
    s: &EmbeddingState<T>,
    h: usize,
    r: usize,
) -> Result<ScoreRow<T>> {
    let mut logits = vec![T::zero(); s.num_entities()];
    score_all_tails_into(s, h, r, &mut logits)?;
    Ok(ScoreRow { logits })
}
