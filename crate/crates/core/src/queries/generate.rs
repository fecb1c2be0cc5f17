use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Query, QueryType};
use crate::error::{KgeError, Result};
use crate::kg::{Dataset, PairIndex, Triple};

const MAX_ATTEMPTS: usize = 1000;

/// Adjacency views over every split of a dataset, original directions only.
pub struct GraphView {
    edges: Vec<Triple>,
    forward: PairIndex,
    incoming: Vec<Vec<(usize, usize)>>,
    outgoing: Vec<Vec<(usize, usize)>>,
}

impl GraphView {
    pub fn new(d: &Dataset) -> Self {
        let mut edges: Vec<Triple> = d
            .all_triples()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        edges.sort();
        let n = d.num_entities();
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        for t in &edges {
            incoming[t.t].push((t.h, t.r));
            outgoing[t.h].push((t.r, t.t));
        }
        Self {
            forward: PairIndex::from_triples(edges.iter().copied()),
            edges,
            incoming,
            outgoing,
        }
    }

    fn tails(&self, h: usize, r: usize) -> BTreeSet<usize> {
        self.forward.tails(h, r).iter().copied().collect()
    }

    fn project(&self, from: &BTreeSet<usize>, r: usize) -> BTreeSet<usize> {
        from.iter()
            .flat_map(|&v| self.forward.tails(v, r).iter().copied())
            .collect()
    }

    /// Hard answers of a query by exhaustive matching over the graph.
    pub fn answers(&self, qtype: QueryType, anchors: &[usize], rels: &[usize]) -> BTreeSet<usize> {
        let a = anchors;
        let r = rels;
        match qtype {
            QueryType::TwoPath => self.project(&self.tails(a[0], r[0]), r[1]),
            QueryType::ThreePath => {
                self.project(&self.project(&self.tails(a[0], r[0]), r[1]), r[2])
            }
            QueryType::TwoIntersect => &self.tails(a[0], r[0]) & &self.tails(a[1], r[1]),
            QueryType::ThreeIntersect => {
                &(&self.tails(a[0], r[0]) & &self.tails(a[1], r[1])) & &self.tails(a[2], r[2])
            }
            QueryType::IntersectPath => {
                self.project(&(&self.tails(a[0], r[0]) & &self.tails(a[1], r[1])), r[2])
            }
            QueryType::PathIntersect => {
                &self.project(&self.tails(a[0], r[0]), r[1]) & &self.tails(a[1], r[2])
            }
            QueryType::TwoUnion => &self.tails(a[0], r[0]) | &self.tails(a[1], r[1]),
            QueryType::UnionPath => {
                self.project(&(&self.tails(a[0], r[0]) | &self.tails(a[1], r[1])), r[2])
            }
        }
    }

    fn random_edge(&self, rng: &mut ChaCha8Rng) -> Triple {
        self.edges[rng.gen_range(0..self.edges.len())]
    }

    /// `k` distinct incoming `(head, relation)` pairs of `v`, if it has that many.
    fn distinct_incoming(
        &self,
        v: usize,
        k: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<Vec<(usize, usize)>> {
        let inc = &self.incoming[v];
        (inc.len() >= k).then(|| inc.choose_multiple(rng, k).copied().collect())
    }

    fn random_out(&self, v: usize, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        self.outgoing[v].choose(rng).copied()
    }

    fn random_in(&self, v: usize, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        self.incoming[v].choose(rng).copied()
    }

    /// One attempt at instantiating `qtype`; `None` when the walk dead-ends.
    fn sample(&self, qtype: QueryType, rng: &mut ChaCha8Rng) -> Option<(Vec<usize>, Vec<usize>)> {
        match qtype {
            QueryType::TwoPath => {
                let e = self.random_edge(rng);
                let (r2, _) = self.random_out(e.t, rng)?;
                Some((vec![e.h], vec![e.r, r2]))
            }
            QueryType::ThreePath => {
                let e = self.random_edge(rng);
                let (r2, v2) = self.random_out(e.t, rng)?;
                let (r3, _) = self.random_out(v2, rng)?;
                Some((vec![e.h], vec![e.r, r2, r3]))
            }
            QueryType::TwoIntersect | QueryType::ThreeIntersect => {
                let k = if qtype == QueryType::TwoIntersect {
                    2
                } else {
                    3
                };
                let target = self.random_edge(rng).t;
                let pairs = self.distinct_incoming(target, k, rng)?;
                Some(pairs.into_iter().unzip())
            }
            QueryType::IntersectPath => {
                let e = self.random_edge(rng);
                let pairs = self.distinct_incoming(e.h, 2, rng)?;
                let (anchors, mut rels): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
                rels.push(e.r);
                Some((anchors, rels))
            }
            QueryType::PathIntersect => {
                let e = self.random_edge(rng);
                let (a1, r1) = self.random_in(e.h, rng)?;
                let (a2, r3) = self.random_in(e.t, rng)?;
                if (a2, r3) == (e.h, e.r) {
                    return None;
                }
                Some((vec![a1, a2], vec![r1, e.r, r3]))
            }
            QueryType::TwoUnion => {
                let e1 = self.random_edge(rng);
                let e2 = self.random_edge(rng);
                if (e1.h, e1.r) == (e2.h, e2.r) {
                    return None;
                }
                Some((vec![e1.h, e2.h], vec![e1.r, e2.r]))
            }
            QueryType::UnionPath => {
                let e = self.random_edge(rng);
                let (a1, r1) = self.random_in(e.h, rng)?;
                let other = self.random_edge(rng);
                if (other.h, other.r) == (a1, r1) {
                    return None;
                }
                Some((vec![a1, other.h], vec![r1, other.r, e.r]))
            }
        }
    }
}

/// Samples `count` queries of one type by random walks over the full graph
/// (train ∪ valid ∪ test). Deterministic for a given `seed` and type.
pub fn generate_queries(
    d: &Dataset,
    qtype: QueryType,
    count: usize,
    seed: u64,
) -> Result<Vec<Query>> {
    let graph = GraphView::new(d);
    generate_with(&graph, qtype, count, seed)
}

pub(crate) fn generate_with(
    graph: &GraphView,
    qtype: QueryType,
    count: usize,
    seed: u64,
) -> Result<Vec<Query>> {
    if graph.edges.is_empty() {
        return Err(KgeError::Generation("graph has no edges".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(qtype as u64);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut found = None;
        for _ in 0..MAX_ATTEMPTS {
            if let Some((anchors, relations)) = graph.sample(qtype, &mut rng) {
                let answers = graph.answers(qtype, &anchors, &relations);
                if !answers.is_empty() {
                    found = Some(Query {
                        qtype,
                        anchors,
                        relations,
                        answers: answers.into_iter().collect(),
                    });
                    break;
                }
            }
        }
        match found {
            Some(q) => out.push(q),
            None => {
                return Err(KgeError::Generation(format!(
                    "could not instantiate a {qtype} query within {MAX_ATTEMPTS} attempts"
                )))
            }
        }
    }
    Ok(out)
}

impl GraphView {
    pub fn generate(&self, qtype: QueryType, count: usize, seed: u64) -> Result<Vec<Query>> {
        generate_with(self, qtype, count, seed)
    }
}
