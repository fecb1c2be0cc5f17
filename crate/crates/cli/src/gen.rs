use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use kge_core::kg::load_dataset;
use kge_core::queries::{write_queries_jsonl, GraphView, QueryType};

use crate::args::GenArgs;

/// `queries.jsonl` → `queries.vocab.json`
pub fn sidecar_vocab_path(queries: &Path) -> PathBuf {
    let stem = queries
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    queries.with_file_name(format!("{stem}.vocab.json"))
}

pub fn run(args: &GenArgs) -> anyhow::Result<()> {
    let data = load_dataset(&args.dataset)?;
    let graph = GraphView::new(&data);
    let types: Vec<QueryType> = if args.types.is_empty() {
        QueryType::ALL.to_vec()
    } else {
        args.types.clone()
    };
    let mut all = Vec::new();
    for t in types {
        let qs = graph.generate(t, args.count, args.seed)?;
        log::info!("{t}: {} queries", qs.len());
        all.extend(qs);
    }
    let file = fs::File::create(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    let mut w = BufWriter::new(file);
    write_queries_jsonl(&mut w, &all)?;
    w.flush()?;
    data.vocab.write_json(&sidecar_vocab_path(&args.output))?;
    Ok(())
}
