//! Filtered link-prediction ranking and MRR / Hits@k aggregation.

mod rank;
mod report;

pub use rank::{evaluate_split, evaluate_split_detailed, filtered_rank, Direction, RankedQuery};
pub use report::{RankingReport, HITS_AT};
