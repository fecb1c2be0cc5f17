use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use kge_core::checkpoint::Checkpoint;
use kge_core::kg::{load_dataset, Dataset};
use kge_core::models::TailScorer;
use kge_core::train::{write_epoch_csv, Strategy, Trainer};
use kge_core::Real;

use crate::args::TrainArgs;
use crate::config::{resolve, RunConfig};
use crate::exit::ConfigError;
use crate::manifest::{Reports, RunManifest, SplitReports, Timings};

pub const RUNNING: &str = "running";
pub const MANIFEST: &str = "manifest.json";
pub const REPORTS: &str = "reports.json";

fn checkpoint_path(out: &Path, name: &str) -> PathBuf {
    out.join(format!("{name}.kgec"))
}

pub fn run(args: &TrainArgs) -> anyhow::Result<()> {
    let cfg = resolve(args)?;
    if args.resume && !cfg.track.is_empty() {
        return Err(ConfigError("--track cannot be combined with --resume".into()).into());
    }
    let data = load_dataset(&cfg.dataset)?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    data.vocab.write_json(&cfg.out.join("vocab.json"))?;

    let started = Instant::now();
    let (mut trainer, mut history) = if args.resume {
        resume(&data, &cfg)?
    } else {
        let mut t = Trainer::new(&data, cfg.train.clone())?;
        for s in &cfg.track {
            match s {
                Strategy::Swa => t.observe_swa()?,
                Strategy::Aswa => t.observe_aswa()?,
                _ => unreachable!("validated by resolve"),
            }
        }
        (t, Vec::new())
    };
    log::info!(
        "training {} (d={}) on {} entities / {} relations, strategy {}, {} epochs",
        cfg.train.model,
        cfg.train.dim,
        data.num_entities(),
        data.num_relations(),
        cfg.train.strategy,
        cfg.train.epochs
    );
    trainer.run(|t, rec| {
        if cfg.checkpoint_every.is_some_and(|n| rec.epoch % n == 0) {
            save_checkpoints(t, &cfg)?;
        }
        Ok::<_, anyhow::Error>(())
    })?;
    let train_seconds = started.elapsed().as_secs_f64();
    history.extend_from_slice(trainer.records());

    let checkpoints = save_checkpoints(&trainer, &cfg)?;
    write_epoch_csv(
        BufWriter::new(create(&cfg.out.join("epochs.csv"))?),
        &history,
    )?;
    if let Some(aswa) = trainer.aswa() {
        aswa.write_log_csv(BufWriter::new(create(&cfg.out.join("aswa_log.csv"))?))?;
    }

    let eval_started = Instant::now();
    let reports = final_reports(&trainer, &data)?;
    let reports_json = serde_json::to_string_pretty(&reports)?;
    fs::write(cfg.out.join(REPORTS), format!("{reports_json}\n"))?;

    let manifest = RunManifest {
        seed: cfg.train.seed,
        num_entities: data.num_entities(),
        num_relations: data.num_relations(),
        epochs: history,
        reports,
        checkpoints,
        timings: Timings {
            train_seconds,
            eval_seconds: eval_started.elapsed().as_secs_f64(),
        },
        config: cfg.clone(),
    };
    manifest.write(&cfg.out.join(MANIFEST))?;
    println!("{reports_json}");
    Ok(())
}

fn create(path: &Path) -> anyhow::Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn resume<'d>(
    data: &'d Dataset,
    cfg: &RunConfig,
) -> anyhow::Result<(Trainer<'d>, Vec<kge_core::train::EpochRecord>)> {
    let running = Checkpoint::read(checkpoint_path(&cfg.out, RUNNING))?;
    let ensemble = match cfg.train.strategy {
        Strategy::None => None,
        s => {
            let path = checkpoint_path(&cfg.out, &s.to_string());
            path.exists().then(|| Checkpoint::read(&path)).transpose()?
        }
    };
    let trainer = Trainer::resume(data, cfg.train.clone(), running, ensemble)?;
    let manifest_path = cfg.out.join(MANIFEST);
    let mut history = if manifest_path.exists() {
        RunManifest::read(&manifest_path)?.epochs
    } else {
        Vec::new()
    };
    history.truncate(trainer.epochs_done());
    log::info!("resuming after epoch {}", trainer.epochs_done());
    Ok((trainer, history))
}

fn save_checkpoints(t: &Trainer<'_>, cfg: &RunConfig) -> anyhow::Result<BTreeMap<String, PathBuf>> {
    let mut written = BTreeMap::new();
    let mut save = |name: &str, ck: Checkpoint<Real>| -> anyhow::Result<()> {
        let path = checkpoint_path(&cfg.out, name);
        ck.write(&path)?;
        written.insert(name.to_string(), path);
        Ok(())
    };
    save(RUNNING, t.training_checkpoint())?;
    if let Some(ck) = t.ensemble_checkpoint()? {
        save(&cfg.train.strategy.to_string(), ck)?;
    }
    for s in &cfg.track {
        if *s == cfg.train.strategy {
            continue;
        }
        match s {
            Strategy::Swa => save("swa", Checkpoint::swa(t.swa().expect("tracked")))?,
            Strategy::Aswa => save("aswa", Checkpoint::aswa(t.aswa().expect("tracked")))?,
            _ => {}
        }
    }
    Ok(written)
}

fn final_reports(t: &Trainer<'_>, data: &Dataset) -> anyhow::Result<Reports> {
    let mut models: Vec<(&str, &dyn TailScorer<Real>)> = vec![(RUNNING, t.params())];
    if let Some(s) = t.swa() {
        if s.n_models > 0 {
            models.push(("swa", &s.theta));
        }
    }
    if let Some(a) = t.aswa() {
        models.push(("aswa", &a.theta));
    }
    if let Some(e) = t.snape() {
        if !e.is_empty() {
            models.push(("snape", e));
        }
    }
    let mut reports = Reports::new();
    for (name, scorer) in models {
        let valid = t.evaluate(scorer, &data.valid)?;
        let test = t.evaluate(scorer, &data.test)?;
        log::info!(
            "{name}: valid MRR {:.4}, test MRR {:.4}",
            valid.mrr,
            test.mrr
        );
        reports.insert(name.to_string(), SplitReports { valid, test });
    }
    Ok(reports)
}
