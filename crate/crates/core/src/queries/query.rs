use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KgeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QueryType {
    #[serde(rename = "2p")]
    TwoPath,
    #[serde(rename = "3p")]
    ThreePath,
    #[serde(rename = "2i")]
    TwoIntersect,
    #[serde(rename = "3i")]
    ThreeIntersect,
    #[serde(rename = "ip")]
    IntersectPath,
    #[serde(rename = "pi")]
    PathIntersect,
    #[serde(rename = "2u")]
    TwoUnion,
    #[serde(rename = "up")]
    UnionPath,
}

impl QueryType {
    pub const ALL: [QueryType; 8] = [
        QueryType::TwoPath,
        QueryType::ThreePath,
        QueryType::TwoIntersect,
        QueryType::ThreeIntersect,
        QueryType::IntersectPath,
        QueryType::PathIntersect,
        QueryType::TwoUnion,
        QueryType::UnionPath,
    ];

    /// `(anchors, relations)`
    pub fn arity(self) -> (usize, usize) {
        match self {
            QueryType::TwoPath => (1, 2),
            QueryType::ThreePath => (1, 3),
            QueryType::TwoIntersect => (2, 2),
            QueryType::ThreeIntersect => (3, 3),
            QueryType::IntersectPath => (2, 3),
            QueryType::PathIntersect => (2, 3),
            QueryType::TwoUnion => (2, 2),
            QueryType::UnionPath => (2, 3),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QueryType::TwoPath => "2p",
            QueryType::ThreePath => "3p",
            QueryType::TwoIntersect => "2i",
            QueryType::ThreeIntersect => "3i",
            QueryType::IntersectPath => "ip",
            QueryType::PathIntersect => "pi",
            QueryType::TwoUnion => "2u",
            QueryType::UnionPath => "up",
        }
    }
}

impl fmt::Display for QueryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryType {
    type Err = KgeError;

    fn from_str(s: &str) -> Result<Self> {
        QueryType::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| KgeError::Config(format!("unknown query type {s:?}")))
    }
}

/// A grounded query with its hard answers. Relations are listed in the order
/// `r1, r2, r3` of the query formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    #[serde(rename = "type")]
    pub qtype: QueryType,
    pub anchors: Vec<usize>,
    pub relations: Vec<usize>,
    pub answers: Vec<usize>,
}

impl Query {
    pub fn validate(&self) -> Result<()> {
        let (na, nr) = self.qtype.arity();
        if self.anchors.len() != na || self.relations.len() != nr {
            return Err(KgeError::Contract(format!(
                "{} query needs {na} anchors and {nr} relations, got {} and {}",
                self.qtype,
                self.anchors.len(),
                self.relations.len()
            )));
        }
        if self.answers.is_empty() {
            return Err(KgeError::Contract(format!(
                "{} query has no answers",
                self.qtype
            )));
        }
        Ok(())
    }
}

pub fn write_queries_jsonl<W: Write>(mut w: W, queries: &[Query]) -> std::io::Result<()> {
    for q in queries {
        serde_json::to_writer(&mut w, q)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_queries_jsonl<R: BufRead>(r: R) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| KgeError::Io {
            path: "<queries>".into(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let q: Query = serde_json::from_str(&line).map_err(|e| KgeError::Parse {
            file: "<queries>".into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(q);
    }
    Ok(out)
}
