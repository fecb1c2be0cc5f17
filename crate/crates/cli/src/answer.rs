use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};

use anyhow::Context;
use kge_core::checkpoint::Checkpoint;
use kge_core::eval::RankingReport;
use kge_core::kg::Vocab;
use kge_core::queries::{evaluate_queries, read_queries_jsonl, BeamConfig};
use kge_core::Real;

use crate::args::AnswerArgs;
use crate::eval::{ensure_same_vocab, load_vocab};
use crate::gen::sidecar_vocab_path;

pub fn run(args: &AnswerArgs) -> anyhow::Result<()> {
    let cfg = BeamConfig {
        beam_width: args.beam_width,
        tnorm: args.tnorm,
    };
    cfg.validate()?;
    let ck = Checkpoint::<Real>::read(&args.checkpoint)?;
    let file = fs::File::open(&args.queries)
        .with_context(|| format!("opening {}", args.queries.display()))?;
    let queries = read_queries_jsonl(BufReader::new(file))?;

    let sidecar = sidecar_vocab_path(&args.queries);
    if let (Some(model_vocab), true) = (
        load_vocab(args.vocab.as_deref(), &args.checkpoint)?,
        sidecar.exists(),
    ) {
        let text = fs::read_to_string(&sidecar)
            .with_context(|| format!("reading {}", sidecar.display()))?;
        ensure_same_vocab(&model_vocab, &Vocab::from_json(&text)?)?;
    }

    let scorer = ck.into_scorer()?;
    let eval = evaluate_queries(&queries, &scorer, &cfg)?;

    if let Some(path) = &args.rankings_csv {
        let mut w = BufWriter::new(
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        writeln!(w, "query,type,answer,rank")?;
        for (i, (q, ranks)) in queries.iter().zip(&eval.ranks).enumerate() {
            for (a, r) in q.answers.iter().zip(ranks) {
                writeln!(w, "{i},{},{a},{r}", q.qtype)?;
            }
        }
        w.flush()?;
    }

    let by_name: BTreeMap<String, &RankingReport> = eval
        .per_type
        .iter()
        .map(|(t, r)| (t.to_string(), r))
        .collect();
    let json = serde_json::to_string_pretty(&by_name)?;
    if let Some(path) = &args.output {
        fs::write(path, format!("{json}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{json}");
    Ok(())
}
