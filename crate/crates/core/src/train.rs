//! KvsAll mini-batch training with optional parameter and score ensembles.
//!
//! One [`Trainer`] owns the running model and its optimizer. SWA and ASWA
//! only read the running parameters at epoch ends, so either can be tracked
//! alongside any strategy without changing the training trajectory. SnapE
//! changes the learning-rate schedule and is therefore tied to its strategy.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, EnsembleMeta};
use crate::ensemble::{AswaState, SnapshotEnsemble, SwaState};
use crate::error::{KgeError, Result};
use crate::eval::{evaluate_split, RankingReport};
use crate::kg::{build_filter, build_kvsall, Dataset, FilterIndex, KvsAllIndex, Triple};
use crate::models::{init_embeddings, kvsall_loss_and_grad, ModelKind, TailScorer};
use crate::optim::{adam_step, sgd_step, CyclicSchedule};
use crate::{Adam, Aswa, Embeddings, Real, SnapE, Swa};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    None,
    Swa,
    Aswa,
    Snape,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::None => "none",
            Strategy::Swa => "swa",
            Strategy::Aswa => "aswa",
            Strategy::Snape => "snape",
        })
    }
}

impl FromStr for Strategy {
    type Err = KgeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Strategy::None),
            "swa" => Ok(Strategy::Swa),
            "aswa" => Ok(Strategy::Aswa),
            "snape" => Ok(Strategy::Snape),
            _ => Err(KgeError::config(format!("unknown strategy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = KgeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            _ => Err(KgeError::config(format!("unknown optimizer {s:?}"))),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelKind,
    /// Real coordinates per embedding.
    pub dim: usize,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub batch_size: usize,
    pub strategy: Strategy,
    /// First 1-based epoch absorbed by SWA.
    pub swa_start: usize,
    pub seed: u64,
    pub smoothing: f64,
    /// Validate on a fixed random subset of this many validation triples.
    pub val_sample: Option<usize>,
    /// Validate every this many epochs (and always after the last one).
    pub val_every: usize,
    pub snape_cycles: usize,
    pub snape_defer: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::ComplEx,
            dim: 128,
            epochs: 256,
            optimizer: OptimizerKind::Adam,
            lr: 0.1,
            batch_size: 1024,
            strategy: Strategy::None,
            swa_start: 1,
            seed: 0,
            smoothing: 0.0,
            val_sample: None,
            val_every: 1,
            snape_cycles: 5,
            snape_defer: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.check_dim(self.dim)?;
        let checks = [
            (self.epochs >= 1, "epochs must be at least 1"),
            (
                self.lr > 0.0 && self.lr.is_finite(),
                "learning rate must be positive",
            ),
            (self.batch_size >= 1, "batch size must be at least 1"),
            (self.swa_start >= 1, "swa start epoch is 1-based"),
            (
                (0.0..1.0).contains(&self.smoothing),
                "label smoothing must lie in [0, 1)",
            ),
            (
                self.val_sample != Some(0),
                "validation sample must be positive",
            ),
            (
                self.val_every >= 1,
                "validation interval must be at least 1",
            ),
        ];
        if let Some((_, msg)) = checks.iter().find(|(ok, _)| !ok) {
            return Err(KgeError::config(*msg));
        }
        if self.strategy == Strategy::Snape {
            self.schedule()?;
        }
        Ok(())
    }

    fn schedule(&self) -> Result<CyclicSchedule> {
        CyclicSchedule::new(self.epochs, self.snape_defer, self.lr, self.snape_cycles)
    }
}

/// One row of the epoch metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mrr_running: Option<f64>,
    pub val_mrr_ensemble: Option<f64>,
    /// `hard`/`soft`/`reject` (aswa), `absorb` (swa), `capture` (snape) or empty.
    pub action: String,
    pub lr: f64,
}

/// Writes `epoch,train_loss,val_mrr_running,val_mrr_ensemble,action,lr`.
pub fn write_epoch_csv<W: Write>(mut w: W, records: &[EpochRecord]) -> std::io::Result<()> {
    fn opt(v: Option<f64>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    writeln!(
        w,
        "epoch,train_loss,val_mrr_running,val_mrr_ensemble,action,lr"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.epoch,
            r.train_loss,
            opt(r.val_mrr_running),
            opt(r.val_mrr_ensemble),
            r.action,
            r.lr
        )?;
    }
    Ok(())
}

pub struct Trainer<'d> {
    data: &'d Dataset,
    cfg: TrainConfig,
    kvsall: KvsAllIndex,
    filter: FilterIndex,
    keys: Vec<(usize, usize)>,
    val_triples: Vec<Triple>,
    schedule: Option<CyclicSchedule>,
    params: Embeddings,
    adam: Option<Adam>,
    epochs_done: usize,
    swa: Option<Swa>,
    aswa: Option<Aswa>,
    snape: Option<SnapE>,
    records: Vec<EpochRecord>,
}

impl<'d> Trainer<'d> {
    /// Fresh run: seeded initialization, optimizer state and the ensemble
    /// required by the configured strategy.
    pub fn new(data: &'d Dataset, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let params = init_embeddings(
            data.num_entities(),
            data.num_relations_with_inverse(),
            cfg.dim,
            cfg.model,
            cfg.seed,
        )?;
        let mut t = Self::assemble(data, cfg, params)?;
        match t.cfg.strategy {
            Strategy::None => {}
            Strategy::Swa => t.observe_swa()?,
            Strategy::Aswa => t.observe_aswa()?,
            Strategy::Snape => t.snape = Some(SnapshotEnsemble::new()),
        }
        Ok(t)
    }

    /// Continues a run from a training checkpoint and, for ensemble
    /// strategies, the matching ensemble checkpoint.
    pub fn resume(
        data: &'d Dataset,
        cfg: TrainConfig,
        running: Checkpoint<Real>,
        ensemble: Option<Checkpoint<Real>>,
    ) -> Result<Self> {
        cfg.validate()?;
        running.ensure_compatible(data.num_entities(), data.num_relations_with_inverse())?;
        if running.params.kind != cfg.model || running.params.dim() != cfg.dim {
            return Err(KgeError::Compat(format!(
                "checkpoint holds {} with width {}, config asks for {} with width {}",
                running.params.kind,
                running.params.dim(),
                cfg.model,
                cfg.dim
            )));
        }
        let epochs_done = running
            .epochs_done
            .ok_or_else(|| KgeError::Compat("checkpoint has no training progress section".into()))?
            as usize;
        let mut t = Self::assemble(data, cfg, running.params)?;
        t.epochs_done = epochs_done;
        if t.cfg.optimizer == OptimizerKind::Adam {
            let adam = running
                .optimizer
                .ok_or_else(|| KgeError::Compat("checkpoint has no optimizer state".into()))?;
            if !adam.is_congruent(&t.params) {
                return Err(KgeError::Compat(
                    "optimizer state does not match parameters".into(),
                ));
            }
            t.adam = Some(adam);
        }
        match (ensemble, t.cfg.strategy) {
            (None, Strategy::None) => {}
            // no cycle has ended yet
            (None, Strategy::Snape) => t.snape = Some(SnapshotEnsemble::new()),
            (None, _) => {
                return Err(KgeError::Compat(format!(
                    "resuming a {} run needs its ensemble checkpoint",
                    t.cfg.strategy
                )))
            }
            (Some(ck), _) => t.restore_ensemble(ck)?,
        }
        Ok(t)
    }

    fn assemble(data: &'d Dataset, cfg: TrainConfig, params: Embeddings) -> Result<Self> {
        let kvsall = build_kvsall(data);
        let filter = build_filter(data);
        let keys: Vec<(usize, usize)> = kvsall.keys().collect();
        if keys.is_empty() {
            return Err(KgeError::config("training split is empty"));
        }
        let val_triples = match cfg.val_sample {
            Some(n) if n < data.valid.len() => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(2);
                let mut idx: Vec<usize> =
                    rand::seq::index::sample(&mut rng, data.valid.len(), n).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|i| data.valid[i]).collect()
            }
            _ => data.valid.clone(),
        };
        let adam = match cfg.optimizer {
            OptimizerKind::Adam => Some(Adam::new(&params, cfg.lr)?),
            OptimizerKind::Sgd => None,
        };
        let schedule = match cfg.strategy {
            Strategy::Snape => Some(cfg.schedule()?),
            _ => None,
        };
        Ok(Self {
            data,
            kvsall,
            filter,
            keys,
            val_triples,
            schedule,
            params,
            adam,
            epochs_done: 0,
            swa: None,
            aswa: None,
            snape: None,
            records: Vec::new(),
            cfg,
        })
    }

    fn restore_ensemble(&mut self, ck: Checkpoint<Real>) -> Result<()> {
        if !ck.params.is_congruent(&self.params) {
            return Err(KgeError::Compat(
                "ensemble checkpoint does not match the running model".into(),
            ));
        }
        match (self.cfg.strategy, ck.ensemble.clone()) {
            (Strategy::Swa, Some(EnsembleMeta::Swa { n_models })) => {
                let mut s = SwaState::new(&ck.params, self.cfg.swa_start);
                s.n_models = n_models as usize;
                self.swa = Some(s);
            }
            (
                Strategy::Aswa,
                Some(EnsembleMeta::Aswa {
                    alpha_count,
                    val_aswa,
                }),
            ) => {
                let mut a = AswaState::new(&ck.params);
                a.alpha_count = alpha_count as usize;
                a.val_aswa = val_aswa;
                self.aswa = Some(a);
            }
            (Strategy::Snape, Some(EnsembleMeta::SnapE { .. })) => {
                self.snape = ck.snapshot_ensemble()?;
            }
            (s, meta) => {
                return Err(KgeError::Compat(format!(
                    "a {s} run cannot resume from ensemble section {meta:?}"
                )))
            }
        }
        Ok(())
    }

    /// Tracks an SWA average from `swa_start` on. Must be called before the
    /// first epoch.
    pub fn observe_swa(&mut self) -> Result<()> {
        self.ensure_fresh("SWA")?;
        self.swa
            .get_or_insert_with(|| SwaState::new(&self.params, self.cfg.swa_start));
        Ok(())
    }

    /// Tracks an ASWA ensemble starting from the initial parameters. Must be
    /// called before the first epoch.
    pub fn observe_aswa(&mut self) -> Result<()> {
        self.ensure_fresh("ASWA")?;
        self.aswa
            .get_or_insert_with(|| AswaState::new(&self.params));
        Ok(())
    }

    fn ensure_fresh(&self, what: &str) -> Result<()> {
        if self.epochs_done > 0 {
            return Err(KgeError::contract(format!(
                "{what} tracking must start before the first epoch"
            )));
        }
        Ok(())
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn params(&self) -> &Embeddings {
        &self.params
    }

    pub fn optimizer(&self) -> Option<&Adam> {
        self.adam.as_ref()
    }

    pub fn swa(&self) -> Option<&Swa> {
        self.swa.as_ref()
    }

    pub fn aswa(&self) -> Option<&Aswa> {
        self.aswa.as_ref()
    }

    pub fn snape(&self) -> Option<&SnapE> {
        self.snape.as_ref()
    }

    pub fn records(&self) -> &[EpochRecord] {
        &self.records
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    pub fn is_finished(&self) -> bool {
        self.epochs_done >= self.cfg.epochs
    }

    pub fn filter(&self) -> &FilterIndex {
        &self.filter
    }

    /// Filtered MRR on the (possibly subsampled) validation triples.
    pub fn validation_mrr<S: TailScorer<Real> + ?Sized>(&self, scorer: &S) -> Result<f64> {
        if self.val_triples.is_empty() {
            return Err(KgeError::Eval("validation split is empty".into()));
        }
        Ok(evaluate_split(scorer, &self.val_triples, &self.filter)?.mrr)
    }

    /// Filtered report on `triples` with the all-splits filter.
    pub fn evaluate<S: TailScorer<Real> + ?Sized>(
        &self,
        scorer: &S,
        triples: &[Triple],
    ) -> Result<RankingReport> {
        evaluate_split(scorer, triples, &self.filter)
    }

    /// Checkpoint of the running model that [`Trainer::resume`] accepts.
    pub fn training_checkpoint(&self) -> Checkpoint<Real> {
        Checkpoint::training(
            self.params.clone(),
            self.adam.clone(),
            self.epochs_done as u64,
        )
    }

    /// Checkpoint of the ensemble selected by the strategy, if it has content.
    pub fn ensemble_checkpoint(&self) -> Result<Option<Checkpoint<Real>>> {
        Ok(match self.cfg.strategy {
            Strategy::None => None,
            Strategy::Swa => self.swa.as_ref().map(Checkpoint::swa),
            Strategy::Aswa => self.aswa.as_ref().map(Checkpoint::aswa),
            Strategy::Snape => match &self.snape {
                Some(e) if !e.is_empty() => Some(Checkpoint::snape(e)?),
                _ => None,
            },
        })
    }

    fn learning_rate(&self, epoch0: usize) -> Result<f64> {
        match &self.schedule {
            Some(s) => s.lr(epoch0),
            None => Ok(self.cfg.lr),
        }
    }

    /// Key order for a 1-based epoch: a fresh permutation per epoch, derived
    /// from the seed alone so resumed runs see the same batches.
    fn epoch_keys(&self, epoch: usize) -> Vec<(usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_add(epoch as u64));
        rng.set_stream(1);
        let mut keys = self.keys.clone();
        keys.shuffle(&mut rng);
        keys
    }

    /// One pass over all KvsAll keys followed by the epoch-end ensemble and
    /// validation work.
    pub fn run_epoch(&mut self) -> Result<EpochRecord> {
        if self.is_finished() {
            return Err(KgeError::contract("all configured epochs have already run"));
        }
        let epoch0 = self.epochs_done;
        let epoch = epoch0 + 1;
        let lr = self.learning_rate(epoch0)?;
        if let Some(a) = &mut self.adam {
            a.lr = lr;
        }

        let keys = self.epoch_keys(epoch);
        let mut loss_sum = 0.0;
        for batch in keys.chunks(self.cfg.batch_size) {
            let g = kvsall_loss_and_grad(&self.params, batch, &self.kvsall, self.cfg.smoothing)?;
            if !g.loss.is_finite() {
                return Err(KgeError::Divergence {
                    epoch,
                    loss: g.loss,
                });
            }
            loss_sum += g.loss * batch.len() as f64;
            match &mut self.adam {
                Some(a) => adam_step(&mut self.params, a, &g)?,
                None => sgd_step(&mut self.params, lr, &g)?,
            }
        }
        let train_loss = loss_sum / keys.len() as f64;
        if !train_loss.is_finite() || !self.params.is_finite() {
            return Err(KgeError::Divergence {
                epoch,
                loss: train_loss,
            });
        }

        let validate = epoch.is_multiple_of(self.cfg.val_every) || epoch == self.cfg.epochs;
        let val_running = if validate {
            Some(self.validation_mrr(&self.params)?)
        } else {
            None
        };

        let mut absorbed = false;
        if let Some(swa) = &mut self.swa {
            if swa.is_active(epoch) {
                swa.absorb(&self.params)?;
                absorbed = true;
            }
        }

        let mut aswa_action = None;
        if let (Some(v_run), Some(mut aswa)) = (val_running, self.aswa.take()) {
            let mut cached = Some(v_run);
            let step = aswa.epoch_step(epoch, &self.params, |theta| match cached.take() {
                Some(v) => Ok(v),
                None => self.validation_mrr(theta),
            });
            self.aswa = Some(aswa);
            aswa_action = Some(step?);
        }

        let mut captured = false;
        if let (Some(schedule), Some(snape)) = (&self.schedule, &mut self.snape) {
            if schedule.is_cycle_end(epoch0) {
                snape.capture(&self.params, train_loss)?;
                captured = true;
            }
        }

        let (val_mrr_ensemble, action) = match self.cfg.strategy {
            Strategy::None => (None, String::new()),
            Strategy::Swa => {
                let swa = self.swa.as_ref().expect("swa strategy tracks swa");
                let v = match validate && swa.n_models > 0 {
                    true => Some(self.validation_mrr(&swa.theta)?),
                    false => None,
                };
                (
                    v,
                    if absorbed {
                        "absorb".into()
                    } else {
                        String::new()
                    },
                )
            }
            Strategy::Aswa => {
                let v = aswa_action.map(|_| {
                    self.aswa
                        .as_ref()
                        .expect("aswa strategy tracks aswa")
                        .val_aswa
                });
                (v, aswa_action.map(|a| a.to_string()).unwrap_or_default())
            }
            Strategy::Snape => {
                let ens = self
                    .snape
                    .as_ref()
                    .expect("snape strategy tracks snapshots");
                let v = match validate && !ens.is_empty() {
                    true => Some(self.validation_mrr(ens)?),
                    false => None,
                };
                (
                    v,
                    if captured {
                        "capture".into()
                    } else {
                        String::new()
                    },
                )
            }
        };

        self.epochs_done = epoch;
        let record = EpochRecord {
            epoch,
            train_loss,
            val_mrr_running: val_running,
            val_mrr_ensemble,
            action,
            lr,
        };
        log::info!(
            "epoch {epoch}/{}: loss {train_loss:.6} val(running) {} val(ensemble) {} {}",
            self.cfg.epochs,
            fmt_opt(record.val_mrr_running),
            fmt_opt(record.val_mrr_ensemble),
            record.action
        );
        self.records.push(record.clone());
        Ok(record)
    }

    /// Runs every remaining epoch, calling `on_epoch` after each.
    pub fn run<F, E>(&mut self, mut on_epoch: F) -> std::result::Result<(), E>
    where
        F: FnMut(&Self, &EpochRecord) -> std::result::Result<(), E>,
        E: From<KgeError>,
    {
        while !self.is_finished() {
            let rec = self.run_epoch()?;
            on_epoch(self, &rec)?;
        }
        Ok(())
    }

    pub fn dataset(&self) -> &Dataset {
        self.data
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}
