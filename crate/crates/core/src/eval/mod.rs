//! Scoring estimates against ground truth: per-method day deltas, the best
//! delta per resource, the sorted-delta AUC, leave-one-method-out ablation
//! and the quadratic trend fits.

mod auc;
mod polyfit;

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::aggregate::CreationEstimate;
use crate::model::{
    normalize_uri, truncate_to_day, CanonicalUri, DayDate, PlausibilityWindow, UtcTimestamp, ARCHIVING_BEGAN,
};
use crate::replay::SyntheticWorld;
use crate::sources::Method;

pub use auc::{auc, auc_with, AucAxis, AucError, AucEstimate, AUC_SPACING};
pub use polyfit::{polyfit2, FitError, QuadraticFit};

/// A resource with an independently known creation date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub uri: CanonicalUri,
    pub real_date: DayDate,
    /// Collection the record came from (news, social, domain, manual, ...).
    pub category: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GoldError {
    #[error("gold file: {0}")]
    Csv(#[from] csv::Error),
    #[error("gold file header must be uri,real_date,category; found {0:?}")]
    Header(Vec<String>),
    #[error("gold file has {} bad line(s): {}", .0.len(), format_problems(.0))]
    Format(Vec<(u64, String)>),
}

fn format_problems(problems: &[(u64, String)]) -> String {
    problems
        .iter()
        .map(|(line, msg)| format!("line {line}: {msg}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Reads a `uri,real_date,category` CSV. Every bad row is reported, not
/// just the first.
pub fn load_gold<R: Read>(reader: R, window: &PlausibilityWindow) -> Result<Vec<GoldRecord>, GoldError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    if header != ["uri", "real_date", "category"] {
        return Err(GoldError::Header(header));
    }
    let mut records = Vec::new();
    let mut problems = Vec::new();
    for row in csv.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let uri = normalize_uri(row.get(0).unwrap_or_default());
        let date = DayDate::parse(row.get(1).unwrap_or_default());
        match (uri, date) {
            (Err(e), _) | (_, Err(e)) => problems.push((line, e.to_string())),
            (Ok(uri), Ok(real_date)) => {
                if !window.contains(real_date.midnight()) {
                    problems.push((line, format!("real_date {real_date} outside the plausibility window")));
                } else {
                    records.push(GoldRecord {
                        uri,
                        real_date,
                        category: row.get(2).unwrap_or_default().to_string(),
                    });
                }
            }
        }
    }
    if problems.is_empty() {
        Ok(records)
    } else {
        Err(GoldError::Format(problems))
    }
}

/// Ground truth of a synthetic world, one record per resource.
pub fn gold_from_world(world: &SyntheticWorld) -> Vec<GoldRecord> {
    world
        .resources
        .iter()
        .map(|r| GoldRecord {
            uri: r.uri.clone(),
            real_date: truncate_to_day(r.true_creation),
            category: "synthetic".into(),
        })
        .collect()
}

/// Whole days between the real date and the day of `est`.
pub fn method_delta(real: DayDate, est: Option<UtcTimestamp>) -> Option<i64> {
    est.map(|t| real.days_until(truncate_to_day(t)).abs())
}

/// Smallest present delta and the method that produced it, ties resolved by
/// [`Method::TIE_BREAK`].
pub fn best_delta(deltas: &BTreeMap<Method, Option<i64>>) -> (Option<i64>, Option<Method>) {
    deltas
        .iter()
        .filter_map(|(&m, &d)| d.map(|d| (d, m.tie_break_rank(), m)))
        .min()
        .map_or((None, None), |(d, _, m)| (Some(d), Some(m)))
}

/// Per-resource scores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub gold: GoldRecord,
    /// Each method's estimate, absent when it had no evidence.
    pub estimates: BTreeMap<Method, Option<UtcTimestamp>>,
    pub deltas: BTreeMap<Method, Option<i64>>,
    pub best_delta: Option<i64>,
    pub winning_method: Option<Method>,
}

impl EvalRecord {
    pub fn new(gold: GoldRecord, estimates: BTreeMap<Method, Option<UtcTimestamp>>) -> Self {
        let deltas: BTreeMap<Method, Option<i64>> = estimates
            .iter()
            .map(|(&m, &est)| (m, method_delta(gold.real_date, est)))
            .collect();
        let (best_delta, winning_method) = best_delta(&deltas);
        EvalRecord {
            gold,
            estimates,
            deltas,
            best_delta,
            winning_method,
        }
    }

    /// The same record with `disabled` treated as having returned nothing.
    pub fn without(&self, disabled: Method) -> Self {
        let mut estimates = self.estimates.clone();
        if let Some(e) = estimates.get_mut(&disabled) {
            *e = None;
        }
        EvalRecord::new(self.gold.clone(), estimates)
    }

    /// Earliest estimate across methods.
    pub fn estimated(&self) -> Option<UtcTimestamp> {
        self.estimates.values().filter_map(|e| *e).min()
    }
}

/// Scores one estimate against its gold record.
pub fn evaluate(gold: GoldRecord, ce: &CreationEstimate) -> EvalRecord {
    let estimates = ce.evidence.iter().map(|e| (e.method(), e.estimate())).collect();
    EvalRecord::new(gold, estimates)
}

/// One row of the per-method table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: Method,
    /// Resources for which this method gave the best estimate.
    pub best_count: usize,
    /// `best_count` over all resources that got an estimate.
    pub best_fraction: f64,
    /// Resources for which this method returned any estimate.
    pub contributed: usize,
    pub contributed_fraction: f64,
    pub ablation: Option<Ablation>,
}

/// Result of re-scoring with one method disabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub method: Method,
    pub estimated_count: usize,
    pub auc: Option<f64>,
    /// `(auc_full - auc) / auc_full` in percent; absent when undefined.
    pub percent_lost: Option<f64>,
    pub mean_best_delta: Option<f64>,
    pub fit: Option<QuadraticFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    /// Sorted best delta (days) against normalized rank.
    pub delta_curve: Option<QuadraticFit>,
    /// Estimated date (days since 1995-01-01) against normalized rank by real date.
    pub estimate_curve: Option<QuadraticFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub n: usize,
    pub estimated_count: usize,
    pub estimated_fraction: f64,
    pub exact_count: usize,
    pub exact_fraction: f64,
    pub mean_best_delta: Option<f64>,
    pub auc_axis: AucAxis,
    pub auc_full: Option<f64>,
    pub methods: Vec<MethodRow>,
    pub fits: Fits,
}

fn fraction(count: usize, of: usize) -> f64 {
    if of == 0 {
        0.0
    } else {
        count as f64 / of as f64
    }
}

fn best_deltas(records: &[EvalRecord]) -> Vec<i64> {
    records.iter().filter_map(|r| r.best_delta).collect()
}

fn mean(values: &[i64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<i64>() as f64 / values.len() as f64)
}

fn rank_points(values: &[f64]) -> Vec<(f64, f64)> {
    let last = values.len().saturating_sub(1).max(1) as f64;
    values.iter().enumerate().map(|(i, &v)| (i as f64 / last, v)).collect()
}

fn delta_fit(records: &[EvalRecord]) -> Option<QuadraticFit> {
    let mut deltas = best_deltas(records);
    deltas.sort_unstable();
    let values: Vec<f64> = deltas.iter().map(|&d| d as f64).collect();
    polyfit2(&rank_points(&values)).ok()
}

fn estimate_fit(records: &[EvalRecord]) -> Option<QuadraticFit> {
    let mut pairs: Vec<(DayDate, UtcTimestamp)> = records
        .iter()
        .filter_map(|r| r.estimated().map(|e| (r.gold.real_date, e)))
        .collect();
    pairs.sort();
    let base = truncate_to_day(ARCHIVING_BEGAN);
    let values: Vec<f64> = pairs
        .iter()
        .map(|(_, e)| base.days_until(truncate_to_day(*e)) as f64)
        .collect();
    polyfit2(&rank_points(&values)).ok()
}

/// AUC over the resources that received an estimate.
fn records_auc(records: &[EvalRecord], axis: AucAxis) -> Option<f64> {
    auc_with(&best_deltas(records), axis).ok().map(|a| a.value)
}

/// Re-scores `records` with `disabled` removed and compares against the
/// full run's AUC.
pub fn ablate(records: &[EvalRecord], disabled: Method, axis: AucAxis) -> Ablation {
    let full = records_auc(records, axis);
    let ablated: Vec<EvalRecord> = records.iter().map(|r| r.without(disabled)).collect();
    let auc = records_auc(&ablated, axis);
    let percent_lost = match (full, auc) {
        (Some(f), Some(a)) if f != 0.0 => Some((f - a) / f * 100.0),
        (Some(f), Some(a)) if f == a => Some(0.0),
        _ => None,
    };
    Ablation {
        method: disabled,
        estimated_count: ablated.iter().filter(|r| r.best_delta.is_some()).count(),
        auc,
        percent_lost,
        mean_best_delta: mean(&best_deltas(&ablated)),
        fit: delta_fit(&ablated),
    }
}

/// Summary with one row per method. `ablations` lists the methods to
/// disable one at a time; pass [`Method::ALL`] for every row.
pub fn summarize(records: &[EvalRecord], ablations: &[Method], axis: AucAxis) -> EvalSummary {
    let n = records.len();
    let estimated_count = records.iter().filter(|r| r.best_delta.is_some()).count();
    let exact_count = records.iter().filter(|r| r.best_delta == Some(0)).count();
    let methods = Method::ALL
        .into_iter()
        .map(|method| {
            let best_count = records.iter().filter(|r| r.winning_method == Some(method)).count();
            let contributed = records
                .iter()
                .filter(|r| r.estimates.get(&method).copied().flatten().is_some())
                .count();
            MethodRow {
                method,
                best_count,
                best_fraction: fraction(best_count, estimated_count),
                contributed,
                contributed_fraction: fraction(contributed, n),
                ablation: ablations.contains(&method).then(|| ablate(records, method, axis)),
            }
        })
        .collect();
    EvalSummary {
        n,
        estimated_count,
        estimated_fraction: fraction(estimated_count, n),
        exact_count,
        exact_fraction: fraction(exact_count, n),
        mean_best_delta: mean(&best_deltas(records)),
        auc_axis: axis,
        auc_full: records_auc(records, axis),
        methods,
        fits: Fits {
            delta_curve: delta_fit(records),
            estimate_curve: estimate_fit(records),
        },
    }
}

/// Sorted best deltas as a one-column CSV, for external plotting.
pub fn sorted_deltas_csv(records: &[EvalRecord]) -> String {
    let mut deltas = best_deltas(records);
    deltas.sort_unstable();
    let mut out = String::from("rank,delta_days\n");
    for (i, d) in deltas.iter().enumerate() {
        out.push_str(&format!("{i},{d}\n"));
    }
    out
}
