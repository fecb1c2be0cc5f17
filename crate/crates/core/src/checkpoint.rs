//! Binary checkpoint envelope.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "KGEC" | version u32 | model tag u32 | |E| u64 | |R'| u64 | d u64
//! entity matrix   (|E| × d  f64, row-major)
//! relation matrix (|R'| × d f64, row-major)
//! section*        (tag [u8; 4] | payload length u64 | payload)
//! ```
//!
//! Sections:
//!
//! - `ADAM`: lr, β1, β2, ε (f64), step (u64), then the four moment matrices
//!   `m_entity, m_relation, v_entity, v_relation`.
//! - `PROG`: epochs completed (u64).
//! - `ENSM`: ensemble kind (u32: 0 swa, 1 aswa, 2 snape) followed by
//!   `n_models u64` (swa), `alpha_count u64, val_aswa f64` (aswa) or
//!   `count u64` and that many training losses (snape).
//! - `SNAP`: snapshot count (u64), then for each snapshot its entity and
//!   relation matrices. Only present for snapshot ensembles; the header
//!   matrices then hold the last snapshot.
//!
//! Unknown sections are skipped.

use std::fs;
use std::path::Path;

use crate::ensemble::{AswaState, SnapshotEnsemble, SwaState};
use crate::error::{KgeError, Result};
use crate::matrix::Matrix;
use crate::models::{EmbeddingState, ModelKind, TailScorer};
use crate::optim::AdamState;
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"KGEC";
pub const VERSION: u32 = 1;

const TAG_ADAM: &[u8; 4] = b"ADAM";
const TAG_PROG: &[u8; 4] = b"PROG";
const TAG_ENSM: &[u8; 4] = b"ENSM";
const TAG_SNAP: &[u8; 4] = b"SNAP";

/// Ensemble bookkeeping stored next to the averaged parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleMeta {
    Swa { n_models: u64 },
    Aswa { alpha_count: u64, val_aswa: f64 },
    SnapE { train_losses: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    pub params: EmbeddingState<T>,
    pub optimizer: Option<AdamState<T>>,
    pub epochs_done: Option<u64>,
    pub ensemble: Option<EnsembleMeta>,
    /// Every member of a snapshot ensemble, in capture order.
    pub snapshots: Vec<EmbeddingState<T>>,
}

/// A checkpoint turned into something that scores tails.
pub enum LoadedScorer<T> {
    Single(EmbeddingState<T>),
    Snapshots(SnapshotEnsemble<T>),
}

impl<T: Scalar> TailScorer<T> for LoadedScorer<T> {
    fn num_entities(&self) -> usize {
        match self {
            LoadedScorer::Single(s) => s.num_entities(),
            LoadedScorer::Snapshots(s) => s.num_entities(),
        }
    }

    fn num_relations(&self) -> usize {
        match self {
            LoadedScorer::Single(s) => s.num_relations(),
            LoadedScorer::Snapshots(s) => s.num_relations(),
        }
    }

    fn score_tails_into(&self, h: usize, r: usize, out: &mut [T]) -> Result<()> {
        match self {
            LoadedScorer::Single(s) => s.score_tails_into(h, r, out),
            LoadedScorer::Snapshots(s) => s.score_tails_into(h, r, out),
        }
    }
}

impl<T: Scalar> Checkpoint<T> {
    pub fn model(params: EmbeddingState<T>) -> Self {
        Self {
            params,
            optimizer: None,
            epochs_done: None,
            ensemble: None,
            snapshots: Vec::new(),
        }
    }

    /// Running model with optimizer state and progress, enough to resume.
    pub fn training(
        params: EmbeddingState<T>,
        optimizer: Option<AdamState<T>>,
        epochs_done: u64,
    ) -> Self {
        Self {
            optimizer,
            epochs_done: Some(epochs_done),
            ..Self::model(params)
        }
    }

    pub fn swa(s: &SwaState<T>) -> Self {
        Self {
            ensemble: Some(EnsembleMeta::Swa {
                n_models: s.n_models as u64,
            }),
            ..Self::model(s.theta.clone())
        }
    }

    pub fn aswa(a: &AswaState<T>) -> Self {
        Self {
            ensemble: Some(EnsembleMeta::Aswa {
                alpha_count: a.alpha_count as u64,
                val_aswa: a.val_aswa,
            }),
            ..Self::model(a.theta.clone())
        }
    }

    pub fn snape(e: &SnapshotEnsemble<T>) -> Result<Self> {
        let last = e
            .snapshots
            .last()
            .ok_or_else(|| KgeError::contract("cannot checkpoint an empty snapshot ensemble"))?;
        Ok(Self {
            ensemble: Some(EnsembleMeta::SnapE {
                train_losses: e.train_losses.clone(),
            }),
            snapshots: e.snapshots.clone(),
            ..Self::model(last.clone())
        })
    }

    /// Rebuilds the snapshot ensemble recorded in this checkpoint.
    pub fn snapshot_ensemble(&self) -> Result<Option<SnapshotEnsemble<T>>> {
        let Some(EnsembleMeta::SnapE { train_losses }) = &self.ensemble else {
            return Ok(None);
        };
        let mut ens = SnapshotEnsemble::new();
        for (s, &l) in self.snapshots.iter().zip(train_losses) {
            ens.capture(s, l)?;
        }
        Ok(Some(ens))
    }

    pub fn into_scorer(self) -> Result<LoadedScorer<T>> {
        Ok(match self.snapshot_ensemble()? {
            Some(ens) => LoadedScorer::Snapshots(ens),
            None => LoadedScorer::Single(self.params),
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u32(VERSION);
        w.u32(p.kind.tag());
        w.u64(p.num_entities() as u64);
        w.u64(p.num_relations() as u64);
        w.u64(p.dim() as u64);
        w.matrix(&p.entity);
        w.matrix(&p.relation);

        if let Some(opt) = &self.optimizer {
            w.section(TAG_ADAM, |s| {
                s.f64(opt.lr);
                s.f64(opt.beta1);
                s.f64(opt.beta2);
                s.f64(opt.eps);
                s.u64(opt.step);
                s.matrix(&opt.m_entity);
                s.matrix(&opt.m_relation);
                s.matrix(&opt.v_entity);
                s.matrix(&opt.v_relation);
            });
        }
        if let Some(e) = self.epochs_done {
            w.section(TAG_PROG, |s| s.u64(e));
        }
        if let Some(meta) = &self.ensemble {
            w.section(TAG_ENSM, |s| match meta {
                EnsembleMeta::Swa { n_models } => {
                    s.u32(0);
                    s.u64(*n_models);
                }
                EnsembleMeta::Aswa {
                    alpha_count,
                    val_aswa,
                } => {
                    s.u32(1);
                    s.u64(*alpha_count);
                    s.f64(*val_aswa);
                }
                EnsembleMeta::SnapE { train_losses } => {
                    s.u32(2);
                    s.u64(train_losses.len() as u64);
                    train_losses.iter().for_each(|&l| s.f64(l));
                }
            });
        }
        if !self.snapshots.is_empty() {
            w.section(TAG_SNAP, |s| {
                s.u64(self.snapshots.len() as u64);
                for snap in &self.snapshots {
                    s.matrix(&snap.entity);
                    s.matrix(&snap.relation);
                }
            });
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(KgeError::Compat("not a checkpoint file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(KgeError::Compat(format!(
                "unsupported checkpoint version {version} (expected {VERSION})"
            )));
        }
        let tag = r.u32()?;
        let kind = ModelKind::from_tag(tag)
            .ok_or_else(|| KgeError::Compat(format!("unknown model tag {tag}")))?;
        let ne = r.count()?;
        let nr = r.count()?;
        let d = r.count()?;
        let entity = r.matrix(ne, d)?;
        let relation = r.matrix(nr, d)?;
        let params = EmbeddingState::new(kind, entity, relation)
            .map_err(|e| KgeError::Compat(e.to_string()))?;
        let mut ck = Self::model(params);

        while r.pos < r.buf.len() {
            let tag: [u8; 4] = r.take(4)?.try_into().expect("four bytes");
            let len = r.count()?;
            let payload = r.take(len)?;
            let mut s = Reader {
                buf: payload,
                pos: 0,
            };
            match &tag {
                TAG_ADAM => {
                    ck.optimizer = Some(AdamState {
                        lr: s.f64()?,
                        beta1: s.f64()?,
                        beta2: s.f64()?,
                        eps: s.f64()?,
                        step: s.u64()?,
                        m_entity: s.matrix(ne, d)?,
                        m_relation: s.matrix(nr, d)?,
                        v_entity: s.matrix(ne, d)?,
                        v_relation: s.matrix(nr, d)?,
                    });
                }
                TAG_PROG => ck.epochs_done = Some(s.u64()?),
                TAG_ENSM => {
                    ck.ensemble = Some(match s.u32()? {
                        0 => EnsembleMeta::Swa { n_models: s.u64()? },
                        1 => EnsembleMeta::Aswa {
                            alpha_count: s.u64()?,
                            val_aswa: s.f64()?,
                        },
                        2 => {
                            let n = s.count()?;
                            let train_losses = (0..n).map(|_| s.f64()).collect::<Result<_>>()?;
                            EnsembleMeta::SnapE { train_losses }
                        }
                        k => return Err(KgeError::Compat(format!("unknown ensemble kind {k}"))),
                    });
                }
                TAG_SNAP => {
                    let n = s.count()?;
                    for _ in 0..n {
                        let e = s.matrix(ne, d)?;
                        let rel = s.matrix(nr, d)?;
                        ck.snapshots.push(EmbeddingState {
                            kind,
                            entity: e,
                            relation: rel,
                        });
                    }
                }
                _ => continue,
            }
            if s.pos != payload.len() {
                return Err(KgeError::Compat(format!(
                    "section {} has {} trailing bytes",
                    String::from_utf8_lossy(&tag),
                    payload.len() - s.pos
                )));
            }
        }
        if let Some(EnsembleMeta::SnapE { train_losses }) = &ck.ensemble {
            if train_losses.len() != ck.snapshots.len() {
                return Err(KgeError::Compat(format!(
                    "{} snapshot losses for {} snapshots",
                    train_losses.len(),
                    ck.snapshots.len()
                )));
            }
        }
        Ok(ck)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| KgeError::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| KgeError::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Fails unless the parameter shapes fit a graph with the given counts
    /// (`num_relations` including inverses).
    pub fn ensure_compatible(&self, num_entities: usize, num_relations: usize) -> Result<()> {
        let (ne, nr) = (self.params.num_entities(), self.params.num_relations());
        if ne != num_entities || nr != num_relations {
            return Err(KgeError::Compat(format!(
                "checkpoint has {ne} entities and {nr} relations, dataset has {num_entities} and {num_relations}"
            )));
        }
        Ok(())
    }
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }

    fn matrix<T: Scalar>(&mut self, m: &Matrix<T>) {
        self.buf.reserve(m.as_slice().len() * 8);
        m.as_slice().iter().for_each(|x| self.f64(x.as_f64()));
    }

    fn section(&mut self, tag: &[u8; 4], body: impl FnOnce(&mut Writer)) {
        let mut s = Writer::default();
        body(&mut s);
        self.bytes(tag);
        self.u64(s.buf.len() as u64);
        self.bytes(&s.buf);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                KgeError::Compat(format!(
                    "truncated checkpoint: wanted {n} bytes at offset {}",
                    self.pos
                ))
            })?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("four bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("eight bytes"),
        ))
    }

    fn count(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v)
            .map_err(|_| KgeError::Compat(format!("count {v} does not fit in memory")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("eight bytes"),
        ))
    }

    fn matrix<T: Scalar>(&mut self, rows: usize, cols: usize) -> Result<Matrix<T>> {
        let n = rows
            .checked_mul(cols)
            .filter(|n| n.checked_mul(8).is_some())
            .ok_or_else(|| KgeError::Compat(format!("matrix {rows}×{cols} is too large")))?;
        let raw = self.take(n * 8)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("eight bytes"))))
            .collect();
        Ok(Matrix::from_vec(rows, cols, data))
    }
}
