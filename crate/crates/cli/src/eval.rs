use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use kge_core::checkpoint::Checkpoint;
use kge_core::eval::{evaluate_split_detailed, RankingReport};
use kge_core::kg::{build_filter, load_dataset, Vocab};
use kge_core::{KgeError, Real};

use crate::args::EvalArgs;

pub fn run(args: &EvalArgs) -> anyhow::Result<()> {
    let data = load_dataset(&args.dataset)?;
    let ck = Checkpoint::<Real>::read(&args.checkpoint)?;
    ck.ensure_compatible(data.num_entities(), data.num_relations_with_inverse())?;
    if let Some(vocab) = load_vocab(args.vocab.as_deref(), &args.checkpoint)? {
        ensure_same_vocab(&vocab, &data.vocab)?;
    }
    let scorer = ck.into_scorer()?;
    let filter = build_filter(&data);
    let ranked = evaluate_split_detailed(&scorer, data.split(args.split), &filter)?;
    let report = RankingReport::from_ranks(ranked.iter().map(|q| q.rank).collect());

    if let Some(path) = &args.ranks_csv {
        let mut w = BufWriter::new(
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        writeln!(w, "h,r,t,direction,rank")?;
        for q in &ranked {
            writeln!(
                w,
                "{},{},{},{},{}",
                q.triple.h, q.triple.r, q.triple.t, q.direction, q.rank
            )?;
        }
        w.flush()?;
    }
    let json = report.to_json();
    if let Some(path) = &args.output {
        fs::write(path, format!("{json}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{json}");
    Ok(())
}

/// The explicit vocabulary, else `vocab.json` beside the checkpoint if any.
pub fn load_vocab(explicit: Option<&Path>, checkpoint: &Path) -> anyhow::Result<Option<Vocab>> {
    let path: Option<PathBuf> = match explicit {
        Some(p) => Some(p.to_path_buf()),
        None => checkpoint
            .parent()
            .map(|d| d.join("vocab.json"))
            .filter(|p| p.exists()),
    };
    let Some(path) = path else { return Ok(None) };
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(Vocab::from_json(&text)?))
}

pub fn ensure_same_vocab(expected: &Vocab, actual: &Vocab) -> Result<(), KgeError> {
    if expected.entities() != actual.entities() || expected.relations() != actual.relations() {
        return Err(KgeError::Compat(
            "vocabulary differs from the one the checkpoint was trained with".into(),
        ));
    }
    Ok(())
}
