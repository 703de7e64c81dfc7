use std::fs;
use std::io::{self, Write};
use std::path::Path;

use carbondate::eval::{evaluate, sorted_deltas_csv, summarize, AucAxis, EvalRecord, EvalSummary, GoldRecord};
use carbondate::{Estimator, Method, Transport};

/// Estimates every gold URI and scores the result.
pub fn run_evaluation<T: Transport>(
    gold: Vec<GoldRecord>,
    estimator: &Estimator<T>,
    ablations: &[Method],
    axis: AucAxis,
    workers: usize,
) -> (Vec<EvalRecord>, EvalSummary) {
    let uris: Vec<_> = gold.iter().map(|g| g.uri.clone()).collect();
    let estimates = estimator.estimate_all(&uris, workers);
    let records: Vec<EvalRecord> = gold.into_iter().zip(&estimates).map(|(g, ce)| evaluate(g, ce)).collect();
    let summary = summarize(&records, ablations, axis);
    (records, summary)
}

/// Writes `summary.json`, `records.jsonl` and `deltas.csv` into `dir`.
pub fn write_outputs(dir: &Path, records: &[EvalRecord], summary: &EvalSummary) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary)? + "\n")?;
    let mut jsonl = io::BufWriter::new(fs::File::create(dir.join("records.jsonl"))?);
    for r in records {
        serde_json::to_writer(&mut jsonl, r)?;
        jsonl.write_all(b"\n")?;
    }
    jsonl.flush()?;
    fs::write(dir.join("deltas.csv"), sorted_deltas_csv(records))
}
