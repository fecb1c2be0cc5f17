use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::RankingReport;
use crate::error::{KgeError, Result};
use crate::kg::{FilterIndex, Triple};
use crate::models::TailScorer;
use crate::scalar::Scalar;

/// Rank of `gold` among all candidates not in `filter_out`.
///
/// `filter_out` lists known true answers; `gold` itself is never filtered.
/// Ties count half: `rank = 1 + #{better} + ⌊#{equal} / 2⌋`.
pub fn filtered_rank<T: Scalar>(scores: &[T], gold: usize, filter_out: &[usize]) -> Result<usize> {
    if gold >= scores.len() {
        return Err(KgeError::Index {
            what: "entity",
            index: gold,
            limit: scores.len(),
        });
    }
    let mut excluded = vec![false; scores.len()];
    for &e in filter_out {
        if let Some(x) = excluded.get_mut(e) {
            *x = true;
        }
    }
    excluded[gold] = true;
    let g = scores[gold];
    let (mut better, mut equal) = (0usize, 0usize);
    for (s, &skip) in scores.iter().zip(&excluded) {
        if skip {
            continue;
        }
        if *s > g {
            better += 1;
        } else if *s == g {
            equal += 1;
        }
    }
    Ok(1 + better + equal / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `(h, r, ?)`
    Tail,
    /// `(?, r, t)`, answered as `(t, r⁻¹, ?)`
    Head,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Tail => "tail",
            Direction::Head => "head",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankedQuery {
    pub triple: Triple,
    pub direction: Direction,
    pub rank: usize,
}

/// Ranks every triple in both directions; head queries use the inverse
/// relation `r + |R|`, where `|R|` is half the scorer's relation rows.
pub fn evaluate_split_detailed<T, S>(
    scorer: &S,
    triples: &[Triple],
    filter: &FilterIndex,
) -> Result<Vec<RankedQuery>>
where
    T: Scalar,
    S: TailScorer<T> + ?Sized,
{
    let n_rel = scorer.num_relations() / 2;
    let n_ent = scorer.num_entities();
    let queries: Vec<(Triple, Direction, Triple)> = triples
        .iter()
        .flat_map(|&t| {
            [
                (t, Direction::Tail, t),
                (t, Direction::Head, t.reciprocal(n_rel)),
            ]
        })
        .collect();
    queries
        .par_iter()
        .map_init(
            || vec![T::zero(); n_ent],
            |buf, &(triple, direction, q)| {
                scorer.score_tails_into(q.h, q.r, buf)?;
                let rank = filtered_rank(buf, q.t, filter.tails(q.h, q.r))?;
                Ok(RankedQuery {
                    triple,
                    direction,
                    rank,
                })
            },
        )
        .collect()
}

pub fn evaluate_split<T, S>(
    scorer: &S,
    triples: &[Triple],
    filter: &FilterIndex,
) -> Result<RankingReport>
where
    T: Scalar,
    S: TailScorer<T> + ?Sized,
{
    let ranked = evaluate_split_detailed(scorer, triples, filter)?;
    Ok(RankingReport::from_ranks(
        ranked.iter().map(|q| q.rank).collect(),
    ))
}
