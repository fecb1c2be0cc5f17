//! Multi-hop queries: the eight conjunctive/disjunctive shapes, their
//! generation from a knowledge graph, and beam-search answering with a
//! pretrained link predictor.
//!
//! | type | formula |
//! |------|---------|
//! | 2p | `r1(e, V) ∧ r2(V, ?)` |
//! | 3p | `r1(e, V1) ∧ r2(V1, V2) ∧ r3(V2, ?)` |
//! | 2i | `r1(e1, ?) ∧ r2(e2, ?)` |
//! | 3i | `r1(e1, ?) ∧ r2(e2, ?) ∧ r3(e3, ?)` |
//! | ip | `r1(e1, V) ∧ r2(e2, V) ∧ r3(V, ?)` |
//! | pi | `r1(e1, V) ∧ r2(V, ?) ∧ r3(e2, ?)` |
//! | 2u | `r1(e1, ?) ∨ r2(e2, ?)` |
//! | up | `[r1(e1, V) ∨ r2(e2, V)] ∧ r3(V, ?)` |

mod beam;
mod generate;
mod query;
mod tnorm;

pub use beam::{answer_query, answer_scores, evaluate_queries, BeamConfig, QueryEvaluation};
pub use generate::{generate_queries, GraphView};
pub use query::{read_queries_jsonl, write_queries_jsonl, Query, QueryType};
pub use tnorm::TNorm;
