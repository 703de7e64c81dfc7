use std::io::{self, BufRead, Write};

use carbondate::{map_ordered, normalize_uri, render_report, Estimator, ReportFormat, Transport};
use serde_json::{json, Value};

/// URIs estimated together before their reports are written.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BatchStats {
    pub reports: usize,
    pub malformed: usize,
}

fn report_line<T: Transport>(estimator: &Estimator<T>, format: ReportFormat, line: &str) -> (Value, bool) {
    match normalize_uri(line) {
        Ok(uri) => (render_report(&estimator.estimate(&uri), format), true),
        Err(e) => (json!({"input": line, "error": e.to_string()}), false),
    }
}

/// Reads one URI per line and writes one JSON report per line, in input
/// order. Blank lines are skipped. A malformed URI yields an error object on
/// its line; only I/O failures abort the run.
pub fn run_batch<T: Transport>(
    input: impl BufRead,
    mut output: impl Write,
    estimator: &Estimator<T>,
    format: ReportFormat,
    workers: usize,
) -> io::Result<BatchStats> {
    let mut stats = BatchStats::default();
    let mut lines = input.lines();
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        for line in lines.by_ref() {
            let line = line?;
            let line = line.trim();
            if !line.is_empty() {
                chunk.push(line.to_string());
            }
            if chunk.len() == CHUNK {
                break;
            }
        }
        if chunk.is_empty() {
            break;
        }
        for (value, ok) in map_ordered(&chunk, workers, |line| report_line(estimator, format, line)) {
            serde_json::to_writer(&mut output, &value)?;
            output.write_all(b"\n")?;
            stats.reports += 1;
            stats.malformed += usize::from(!ok);
        }
    }
    output.flush()?;
    Ok(stats)
}
