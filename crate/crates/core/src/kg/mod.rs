//! Dataset ingestion, vocabularies and the derived label/filter indices.
//!
//! Every relation `r` gets an inverse `r + |R|` so that head prediction is
//! expressed as tail prediction on reversed triples. [`Dataset`] keeps the
//! original triples; the indices and the training keys include the reversed
//! ones.

mod dataset;
mod index;
mod vocab;

pub use dataset::{load_dataset, Dataset, Split};
pub use index::{build_filter, build_kvsall, FilterIndex, KvsAllIndex, PairIndex};
pub use vocab::Vocab;

use serde::{Deserialize, Serialize};

/// `(head, relation, tail)` as dense ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub h: usize,
    pub r: usize,
    pub t: usize,
}

impl Triple {
    pub const fn new(h: usize, r: usize, t: usize) -> Self {
        Self { h, r, t }
    }

    /// The reversed triple `(t, r⁻¹, h)` given the number of original relations.
    pub const fn reciprocal(self, num_relations: usize) -> Self {
        Self {
            h: self.t,
            r: self.r + num_relations,
            t: self.h,
        }
    }
}
