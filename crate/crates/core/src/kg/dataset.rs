use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{Triple, Vocab};
use crate::error::{KgeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn file_name(self) -> &'static str {
        match self {
            Split::Train => "train.txt",
            Split::Valid => "valid.txt",
            Split::Test => "test.txt",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = KgeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(KgeError::config(format!("unknown split {other:?}"))),
        }
    }
}

/// A knowledge graph with train/valid/test splits over a shared vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub vocab: Vocab,
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> &[Triple] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    pub fn num_entities(&self) -> usize {
        self.vocab.num_entities()
    }

    pub fn num_relations(&self) -> usize {
        self.vocab.num_relations()
    }

    /// Relation rows needed by a model: originals plus one inverse each.
    pub fn num_relations_with_inverse(&self) -> usize {
        2 * self.vocab.num_relations()
    }

    /// Train triples followed by their reciprocals.
    pub fn train_with_reciprocals(&self) -> impl Iterator<Item = Triple> + '_ {
        let n = self.num_relations();
        self.train
            .iter()
            .copied()
            .chain(self.train.iter().map(move |t| t.reciprocal(n)))
    }

    /// Every triple of every split, original direction only.
    pub fn all_triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.train
            .iter()
            .chain(&self.valid)
            .chain(&self.test)
            .copied()
    }

    /// Builds a dataset from string triples, in the same way [`load_dataset`]
    /// does for files.
    pub fn from_named<S: AsRef<str>>(train: &[[S; 3]], valid: &[[S; 3]], test: &[[S; 3]]) -> Self {
        let mut vocab = Vocab::new();
        let mut intern = |rows: &[[S; 3]], name: &str| {
            let triples = rows
                .iter()
                .map(|[h, r, t]| {
                    let h = vocab.intern_entity(h.as_ref());
                    let r = vocab.intern_relation(r.as_ref());
                    let t = vocab.intern_entity(t.as_ref());
                    Triple::new(h, r, t)
                })
                .collect();
            dedup(triples, name)
        };
        let train = intern(train, "train");
        let valid = intern(valid, "valid");
        let test = intern(test, "test");
        Self {
            vocab,
            train,
            valid,
            test,
        }
    }

    /// Writes `train.txt`, `valid.txt` and `test.txt` in the loader's format.
    pub fn write_tsv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| KgeError::io(dir, e))?;
        for split in Split::ALL {
            let mut out = String::new();
            for t in self.split(split) {
                out.push_str(self.vocab.entity_name(t.h).unwrap());
                out.push('\t');
                out.push_str(&self.vocab.relations()[t.r]);
                out.push('\t');
                out.push_str(self.vocab.entity_name(t.t).unwrap());
                out.push('\n');
            }
            let path = dir.join(split.file_name());
            fs::write(&path, out).map_err(|e| KgeError::io(&path, e))?;
        }
        Ok(())
    }
}

/// Loads `train.txt`, `valid.txt` and `test.txt` from `dir`.
///
/// Each line is `head<TAB>relation<TAB>tail`. Ids are assigned by first
/// occurrence across train, then valid, then test. Duplicate triples inside a
/// split are dropped with a warning.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let mut raw = Vec::with_capacity(3);
    for split in Split::ALL {
        let path = dir.join(split.file_name());
        let text = fs::read_to_string(&path).map_err(|e| KgeError::io(&path, e))?;
        raw.push((path, text));
    }

    let mut vocab = Vocab::new();
    let mut splits = Vec::with_capacity(3);
    for (path, text) in &raw {
        let mut triples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            let fields: Vec<&str> = line.split('\t').collect();
            let parse_err = |message: String| KgeError::Parse {
                file: path.clone(),
                line: lineno + 1,
                message,
            };
            if fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected 3 tab-separated fields, found {}",
                    fields.len()
                )));
            }
            if fields.iter().any(|f| f.is_empty()) {
                return Err(parse_err("empty field".into()));
            }
            let h = vocab.intern_entity(fields[0]);
            let r = vocab.intern_relation(fields[1]);
            let t = vocab.intern_entity(fields[2]);
            triples.push(Triple::new(h, r, t));
        }
        splits.push(dedup(triples, &path.display().to_string()));
    }

    if vocab.num_entities() == 0 || vocab.num_relations() == 0 {
        return Err(KgeError::Parse {
            file: dir.to_path_buf(),
            line: 0,
            message: "dataset contains no triples".into(),
        });
    }

    let test = splits.pop().unwrap();
    let valid = splits.pop().unwrap();
    let train = splits.pop().unwrap();
    let ds = Dataset {
        vocab,
        train,
        valid,
        test,
    };
    warn_on_overlap(&ds);
    Ok(ds)
}

fn dedup(triples: Vec<Triple>, name: &str) -> Vec<Triple> {
    let mut seen = HashSet::with_capacity(triples.len());
    let before = triples.len();
    let out: Vec<Triple> = triples.into_iter().filter(|t| seen.insert(*t)).collect();
    if out.len() != before {
        warn!("{name}: dropped {} duplicate triples", before - out.len());
    }
    out
}

fn warn_on_overlap(ds: &Dataset) {
    let train: HashSet<_> = ds.train.iter().collect();
    let valid: HashSet<_> = ds.valid.iter().collect();
    let tv = ds.valid.iter().filter(|t| train.contains(t)).count();
    let tt = ds.test.iter().filter(|t| train.contains(t)).count();
    let vt = ds.test.iter().filter(|t| valid.contains(t)).count();
    if tv + tt + vt > 0 {
        warn!("splits overlap: train∩valid={tv} train∩test={tt} valid∩test={vt}");
    }
}
