use std::collections::BTreeMap;

use super::{Dataset, Triple};

/// Map from `(head, relation)` to the sorted, deduplicated set of tails.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairIndex {
    map: BTreeMap<(usize, usize), Vec<usize>>,
}

impl PairIndex {
    pub fn from_triples<I: IntoIterator<Item = Triple>>(triples: I) -> Self {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for t in triples {
            map.entry((t.h, t.r)).or_default().push(t.t);
        }
        for tails in map.values_mut() {
            tails.sort_unstable();
            tails.dedup();
        }
        Self { map }
    }

    pub fn get(&self, h: usize, r: usize) -> Option<&[usize]> {
        self.map.get(&(h, r)).map(Vec::as_slice)
    }

    /// Tails of `(h, r)`, empty when the pair is unknown.
    pub fn tails(&self, h: usize, r: usize) -> &[usize] {
        self.get(h, r).unwrap_or(&[])
    }

    pub fn contains(&self, h: usize, r: usize, t: usize) -> bool {
        self.get(h, r)
            .is_some_and(|ts| ts.binary_search(&t).is_ok())
    }

    /// Keys in ascending `(h, r)` order.
    pub fn keys(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.map.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &[usize])> + '_ {
        self.map.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Expands every key over its tail set.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.map
            .iter()
            .flat_map(|(&(h, r), ts)| ts.iter().map(move |&t| Triple::new(h, r, t)))
    }
}

/// Multi-hot training labels: every `(h, r)` of the (reciprocal-augmented)
/// training split with its true tails.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvsAllIndex(pub PairIndex);

/// Known true tails over train ∪ valid ∪ test (reciprocal-augmented), used to
/// filter competing answers during ranking.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterIndex(pub PairIndex);

impl std::ops::Deref for KvsAllIndex {
    type Target = PairIndex;
    fn deref(&self) -> &PairIndex {
        &self.0
    }
}

impl std::ops::Deref for FilterIndex {
    type Target = PairIndex;
    fn deref(&self) -> &PairIndex {
        &self.0
    }
}

pub fn build_kvsall(d: &Dataset) -> KvsAllIndex {
    KvsAllIndex(PairIndex::from_triples(d.train_with_reciprocals()))
}

pub fn build_filter(d: &Dataset) -> FilterIndex {
    let n = d.num_relations();
    FilterIndex(PairIndex::from_triples(
        d.all_triples().flat_map(|t| [t, t.reciprocal(n)]),
    ))
}
