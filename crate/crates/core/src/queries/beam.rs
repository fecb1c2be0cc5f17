use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Query, QueryType, TNorm};
use crate::error::{KgeError, Result};
use crate::eval::{filtered_rank, RankingReport};
use crate::models::TailScorer;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamConfig {
    /// Substitutions kept per variable.
    pub beam_width: usize,
    pub tnorm: TNorm,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            beam_width: 10,
            tnorm: TNorm::Product,
        }
    }
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 {
            return Err(KgeError::Config("beam width must be at least 1".into()));
        }
        Ok(())
    }
}

struct Grounder<'a, T, S: ?Sized> {
    scorer: &'a S,
    cfg: BeamConfig,
    _t: std::marker::PhantomData<T>,
}

impl<T: Scalar, S: TailScorer<T> + ?Sized> Grounder<'_, T, S> {
    /// Truth values `σ(φ(h, r, x))` for every `x`.
    fn atom(&self, h: usize, r: usize) -> Result<Vec<T>> {
        let mut row = self.scorer.score_tails(h, r)?.logits;
        row.iter_mut().for_each(|z| *z = z.sigmoid());
        Ok(row)
    }

    fn and(&self, a: &[T], b: &[T]) -> Vec<T> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| self.cfg.tnorm.and(x, y))
            .collect()
    }

    fn or(&self, a: &[T], b: &[T]) -> Vec<T> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| self.cfg.tnorm.or(x, y))
            .collect()
    }

    /// Top-`k` substitutions, best first, ties by ascending id.
    fn beam(&self, scores: &[T]) -> Vec<(usize, T)> {
        let mut ranked = rank_desc(scores);
        ranked.truncate(self.cfg.beam_width);
        ranked
    }

    /// `out[x] = max_{(v, s) ∈ beam} T(s, σ(φ(v, r, x)))`
    fn project(&self, beam: &[(usize, T)], r: usize) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.scorer.num_entities()];
        for &(v, s) in beam {
            let row = self.atom(v, r)?;
            for (o, p) in out.iter_mut().zip(row) {
                *o = o.max(self.cfg.tnorm.and(s, p));
            }
        }
        Ok(out)
    }

    fn ground(&self, q: &Query) -> Result<Vec<T>> {
        let a = &q.anchors;
        let r = &q.relations;
        match q.qtype {
            QueryType::TwoPath => {
                let v = self.beam(&self.atom(a[0], r[0])?);
                self.project(&v, r[1])
            }
            QueryType::ThreePath => {
                let v1 = self.beam(&self.atom(a[0], r[0])?);
                let v2 = self.beam(&self.project(&v1, r[1])?);
                self.project(&v2, r[2])
            }
            QueryType::TwoIntersect => {
                Ok(self.and(&self.atom(a[0], r[0])?, &self.atom(a[1], r[1])?))
            }
            QueryType::ThreeIntersect => {
                let ab = self.and(&self.atom(a[0], r[0])?, &self.atom(a[1], r[1])?);
                Ok(self.and(&ab, &self.atom(a[2], r[2])?))
            }
            QueryType::IntersectPath => {
                let v = self.and(&self.atom(a[0], r[0])?, &self.atom(a[1], r[1])?);
                self.project(&self.beam(&v), r[2])
            }
            QueryType::PathIntersect => {
                let v = self.beam(&self.atom(a[0], r[0])?);
                let path = self.project(&v, r[1])?;
                Ok(self.and(&path, &self.atom(a[1], r[2])?))
            }
            QueryType::TwoUnion => Ok(self.or(&self.atom(a[0], r[0])?, &self.atom(a[1], r[1])?)),
            QueryType::UnionPath => {
                let v = self.or(&self.atom(a[0], r[0])?, &self.atom(a[1], r[1])?);
                self.project(&self.beam(&v), r[2])
            }
        }
    }
}

fn rank_desc<T: Scalar>(scores: &[T]) -> Vec<(usize, T)> {
    let mut ranked: Vec<(usize, T)> = scores.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    ranked
}

fn check_ids<T: Scalar, S: TailScorer<T> + ?Sized>(q: &Query, scorer: &S) -> Result<()> {
    let (na, nr) = q.qtype.arity();
    if q.anchors.len() != na || q.relations.len() != nr {
        return Err(KgeError::Contract(format!(
            "{} query needs {na} anchors and {nr} relations, got {} and {}",
            q.qtype,
            q.anchors.len(),
            q.relations.len()
        )));
    }
    if let Some(&e) = q.anchors.iter().find(|&&e| e >= scorer.num_entities()) {
        return Err(KgeError::Index {
            what: "entity",
            index: e,
            limit: scorer.num_entities(),
        });
    }
    if let Some(&r) = q.relations.iter().find(|&&r| r >= scorer.num_relations()) {
        return Err(KgeError::Index {
            what: "relation",
            index: r,
            limit: scorer.num_relations(),
        });
    }
    Ok(())
}

/// Aggregated truth value of every candidate answer, indexed by entity id.
pub fn answer_scores<T, S>(q: &Query, scorer: &S, cfg: &BeamConfig) -> Result<Vec<T>>
where
    T: Scalar,
    S: TailScorer<T> + ?Sized,
{
    cfg.validate()?;
    check_ids(q, scorer)?;
    Grounder {
        scorer,
        cfg: *cfg,
        _t: std::marker::PhantomData,
    }
    .ground(q)
}

/// All entities ranked by aggregated score, descending; ties by id.
pub fn answer_query<T, S>(q: &Query, scorer: &S, cfg: &BeamConfig) -> Result<Vec<(usize, T)>>
where
    T: Scalar,
    S: TailScorer<T> + ?Sized,
{
    Ok(rank_desc(&answer_scores(q, scorer, cfg)?))
}

/// Per-query answer ranks and per-type aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryEvaluation {
    pub per_type: BTreeMap<QueryType, RankingReport>,
    /// `ranks[i][j]` is the filtered rank of `queries[i].answers[j]`.
    pub ranks: Vec<Vec<usize>>,
}

/// Ranks each hard answer against all entities with the query's other
/// answers filtered out, and averages per query, then per type.
pub fn evaluate_queries<T, S>(
    queries: &[Query],
    scorer: &S,
    cfg: &BeamConfig,
) -> Result<QueryEvaluation>
where
    T: Scalar,
    S: TailScorer<T> + ?Sized,
{
    for q in queries {
        q.validate()?;
    }
    let ranks: Vec<Vec<usize>> = queries
        .par_iter()
        .map(|q| {
            let scores = answer_scores(q, scorer, cfg)?;
            q.answers
                .iter()
                .map(|&gold| filtered_rank(&scores, gold, &q.answers))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut grouped: BTreeMap<QueryType, Vec<&[usize]>> = BTreeMap::new();
    for (q, r) in queries.iter().zip(&ranks) {
        grouped.entry(q.qtype).or_default().push(r);
    }
    let per_type = grouped
        .into_iter()
        .map(|(t, groups)| (t, RankingReport::from_groups(groups)))
        .collect();
    Ok(QueryEvaluation { per_type, ranks })
}
