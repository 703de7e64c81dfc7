//! Combining per-method votes into one creation estimate, and the JSON
//! report served by the API.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::model::{truncate_to_day, CanonicalUri, UtcTimestamp};
use crate::sources::{Detail, EvidenceResult, Granularity, Method};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AggregateError {
    #[error("method {0} appears more than once in the evidence")]
    DuplicateMethod(Method),
}

/// The best estimate for one URI plus every vote behind it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreationEstimate {
    pub uri: CanonicalUri,
    pub estimated: Option<UtcTimestamp>,
    pub winning_method: Option<Method>,
    /// Sorted by method name.
    pub evidence: Vec<EvidenceResult>,
}

impl CreationEstimate {
    pub fn evidence_for(&self, method: Method) -> Option<&EvidenceResult> {
        self.evidence.iter().find(|e| e.method() == method)
    }
}

/// Earliest `Ok` estimate wins. Equal estimates resolve by
/// [`Method::TIE_BREAK`], so the result does not depend on input order.
pub fn aggregate(
    uri: &CanonicalUri,
    mut evidence: Vec<EvidenceResult>,
) -> Result<CreationEstimate, AggregateError> {
    evidence.sort_by_key(|e| e.method());
    if let Some(pair) = evidence.windows(2).find(|w| w[0].method() == w[1].method()) {
        return Err(AggregateError::DuplicateMethod(pair[0].method()));
    }
    let best = evidence
        .iter()
        .filter_map(|e| e.estimate().map(|t| (t, e.method().tie_break_rank(), e.method())))
        .min();
    Ok(CreationEstimate {
        uri: uri.clone(),
        estimated: best.map(|(t, _, _)| t),
        winning_method: best.map(|(_, _, m)| m),
        evidence,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    /// The historical key names of the public API (`Bitly`, `Topsy.com`, ...).
    #[default]
    Legacy,
    /// Registry method names as keys.
    Generic,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "legacy" => Ok(ReportFormat::Legacy),
            "generic" => Ok(ReportFormat::Generic),
            other => Err(format!("unknown report format {other:?}; expected legacy or generic")),
        }
    }
}

/// Legacy report key for each method, in report order.
const LEGACY_KEYS: [(Method, &str); 5] = [
    (Method::LastModified, "Last Modified"),
    (Method::Shortener, "Bitly"),
    (Method::Social, "Topsy.com"),
    (Method::Backlinks, "Backlinks"),
    (Method::SearchIndex, "Google.com"),
];

fn render_instant(t: UtcTimestamp, granularity: Granularity) -> String {
    match granularity {
        Granularity::Second => t.to_iso(),
        Granularity::Day => truncate_to_day(t).to_string(),
    }
}

fn render_evidence(e: Option<&EvidenceResult>) -> String {
    e.and_then(|e| e.estimate().map(|t| render_instant(t, e.granularity())))
        .unwrap_or_default()
}

fn by_archive(e: Option<&EvidenceResult>) -> Map<String, Value> {
    let mut map = Map::new();
    if let Some(Detail::Archives { by_archive }) = e.filter(|e| e.is_ok()).map(|e| e.detail()) {
        for entry in by_archive {
            map.insert(entry.archive.clone(), Value::String(entry.earliest.to_iso()));
        }
    }
    map
}

/// Renders the fixed-shape report. Absent values are empty strings;
/// day-granular values render as `YYYY-MM-DD`.
pub fn render_report(ce: &CreationEstimate, format: ReportFormat) -> Value {
    let estimated = match (ce.estimated, ce.winning_method) {
        (Some(t), Some(m)) => render_instant(t, m.granularity()),
        _ => String::new(),
    };
    let archives = ce.evidence_for(Method::Archives);
    match format {
        ReportFormat::Legacy => {
            let mut root = Map::new();
            root.insert("URI".into(), Value::String(ce.uri.to_string()));
            root.insert("Estimated Creation Date".into(), Value::String(estimated));
            for (method, key) in LEGACY_KEYS {
                root.insert(key.into(), Value::String(render_evidence(ce.evidence_for(method))));
            }
            root.insert(
                "Archives".into(),
                json!({
                    "Earliest": render_evidence(archives),
                    "By Archive": Value::Object(by_archive(archives)),
                }),
            );
            Value::Object(root)
        }
        ReportFormat::Generic => {
            let mut root = Map::new();
            root.insert("uri".into(), Value::String(ce.uri.to_string()));
            root.insert("estimated_creation_date".into(), Value::String(estimated));
            root.insert(
                "winning_method".into(),
                Value::String(ce.winning_method.map(|m| m.name().to_string()).unwrap_or_default()),
            );
            for method in Method::ALL {
                let value = if method == Method::Archives {
                    json!({
                        "earliest": render_evidence(archives),
                        "by_archive": Value::Object(by_archive(archives)),
                    })
                } else {
                    Value::String(render_evidence(ce.evidence_for(method)))
                };
                root.insert(method.name().into(), value);
            }
            Value::Object(root)
        }
    }
}

/// Pretty-printed report with a trailing newline.
pub fn render_report_string(ce: &CreationEstimate, format: ReportFormat) -> String {
    let mut s = serde_json::to_string_pretty(&render_report(ce, format)).expect("report serializes");
    s.push('\n');
    s
}

/// The values a rendered report carries, read back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedReport {
    pub uri: String,
    pub estimated: Option<UtcTimestamp>,
    pub methods: BTreeMap<Method, Option<UtcTimestamp>>,
    pub by_archive: BTreeMap<String, UtcTimestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid report: {0}")]
pub struct ReportParseError(String);

fn parse_value(v: Option<&Value>, field: &str) -> Result<Option<UtcTimestamp>, ReportParseError> {
    match v.and_then(Value::as_str) {
        None => Err(ReportParseError(format!("missing string field {field:?}"))),
        Some("") => Ok(None),
        Some(s) => UtcTimestamp::parse_iso(s)
            .map(Some)
            .map_err(|e| ReportParseError(format!("{field}: {e}"))),
    }
}

impl ParsedReport {
    pub fn from_value(v: &Value, format: ReportFormat) -> Result<Self, ReportParseError> {
        let (uri_key, est_key, archives_key, earliest_key, by_key) = match format {
            ReportFormat::Legacy => ("URI", "Estimated Creation Date", "Archives", "Earliest", "By Archive"),
            ReportFormat::Generic => ("uri", "estimated_creation_date", "archives", "earliest", "by_archive"),
        };
        let uri = v
            .get(uri_key)
            .and_then(Value::as_str)
            .ok_or_else(|| ReportParseError(format!("missing {uri_key:?}")))?
            .to_string();
        let estimated = parse_value(v.get(est_key), est_key)?;
        let mut methods = BTreeMap::new();
        for method in Method::ALL {
            let value = if method == Method::Archives {
                parse_value(v.get(archives_key).and_then(|a| a.get(earliest_key)), earliest_key)?
            } else {
                let key = match format {
                    ReportFormat::Legacy => LEGACY_KEYS
                        .iter()
                        .find(|(m, _)| *m == method)
                        .map(|(_, k)| *k)
                        .expect("legacy key for every non-archive method"),
                    ReportFormat::Generic => method.name(),
                };
                parse_value(v.get(key), key)?
            };
            methods.insert(method, value);
        }
        let mut by_archive = BTreeMap::new();
        if let Some(map) = v.get(archives_key).and_then(|a| a.get(by_key)).and_then(Value::as_object) {
            for (host, value) in map {
                if let Some(t) = parse_value(Some(value), host)? {
                    by_archive.insert(host.clone(), t);
                }
            }
        }
        Ok(ParsedReport {
            uri,
            estimated,
            methods,
            by_archive,
        })
    }
}
