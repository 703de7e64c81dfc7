//! The six evidence sources and the fan-out that polls them.
//!
//! Every source turns one upstream (or a short protocol against one) into an
//! [`EvidenceResult`]. Failures never escape a source: they become
//! `Status::Error` so one broken upstream cannot hide the others.

mod archives;
mod backlinks;
mod last_modified;
mod search_index;
mod shortener;
mod social;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{filter_plausible, truncate_to_day, CanonicalUri, DayDate, PlausibilityWindow, UtcTimestamp};
use crate::transport::{HttpRequest, HttpResponse, Transport, TransportError};

pub use archives::query_archives;
pub use backlinks::query_backlinks;
pub use last_modified::probe_last_modified;
pub use search_index::query_search_index;
pub use shortener::query_shortener;
pub use social::{query_social, SOCIAL_POST_LIMIT};

/// A dating method. Declaration order is alphabetical by [`Method::name`],
/// which is the order results are reported in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Archives,
    Backlinks,
    LastModified,
    SearchIndex,
    Shortener,
    Social,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Archives,
        Method::Backlinks,
        Method::LastModified,
        Method::SearchIndex,
        Method::Shortener,
        Method::Social,
    ];

    /// Order used to pick a winner among equal estimates.
    pub const TIE_BREAK: [Method; 6] = [
        Method::Archives,
        Method::LastModified,
        Method::Shortener,
        Method::Social,
        Method::Backlinks,
        Method::SearchIndex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Archives => "archives",
            Method::Backlinks => "backlinks",
            Method::LastModified => "last_modified",
            Method::SearchIndex => "search_index",
            Method::Shortener => "shortener",
            Method::Social => "social",
        }
    }

    pub fn tie_break_rank(self) -> usize {
        Method::TIE_BREAK
            .iter()
            .position(|&m| m == self)
            .expect("every method ranked")
    }

    pub fn granularity(self) -> Granularity {
        match self {
            Method::SearchIndex => Granularity::Day,
            _ => Granularity::Second,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method {0:?}")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Second,
    Day,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Empty,
    Error(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceFlag {
    /// Some upstream fetch failed and was treated as "no evidence".
    PartialFetch,
    /// The social service returned its full page of posts, so the true first
    /// post may be older than anything seen.
    ClippedSocialWindow,
    /// A candidate timestamp fell outside the plausibility window and was dropped.
    ImplausibleDiscarded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveEarliest {
    pub archive: String,
    pub earliest: UtcTimestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BacklinkTrace {
    pub uri: CanonicalUri,
    pub captures: usize,
    pub fetches: usize,
    pub first_linked: Option<UtcTimestamp>,
}

/// Method-specific provenance carried alongside an estimate.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detail {
    #[default]
    None,
    /// Earliest plausible capture per archive, ascending by date then host.
    Archives { by_archive: Vec<ArchiveEarliest> },
    Shortener { short_url: String },
    Social { returned: usize, total: Option<u64> },
    SearchIndex { day: DayDate },
    Backlinks { backlinks: Vec<BacklinkTrace> },
}

/// One method's vote. `status` is `Ok` exactly when `estimate` is present,
/// and a present estimate always lies inside the plausibility window it was
/// built with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceResult {
    method: Method,
    estimate: Option<UtcTimestamp>,
    granularity: Granularity,
    status: Status,
    #[serde(default)]
    detail: Detail,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    flags: BTreeSet<ConfidenceFlag>,
}

impl EvidenceResult {
    /// An `Ok` result when `t` is plausible, otherwise `Empty` flagged
    /// [`ConfidenceFlag::ImplausibleDiscarded`]. Day-granularity methods
    /// report the midnight starting `t`'s day.
    pub fn found(method: Method, t: UtcTimestamp, window: &PlausibilityWindow) -> Self {
        let t = match method.granularity() {
            Granularity::Second => t,
            Granularity::Day => truncate_to_day(t).midnight(),
        };
        match filter_plausible(t, window) {
            Some(t) => EvidenceResult {
                method,
                estimate: Some(t),
                granularity: method.granularity(),
                status: Status::Ok,
                detail: Detail::None,
                flags: BTreeSet::new(),
            },
            None => EvidenceResult::empty(method).with_flag(ConfidenceFlag::ImplausibleDiscarded),
        }
    }

    pub fn empty(method: Method) -> Self {
        EvidenceResult {
            method,
            estimate: None,
            granularity: method.granularity(),
            status: Status::Empty,
            detail: Detail::None,
            flags: BTreeSet::new(),
        }
    }

    pub fn error(method: Method, message: impl Into<String>) -> Self {
        EvidenceResult {
            status: Status::Error(message.into()),
            ..EvidenceResult::empty(method)
        }
    }

    pub fn with_detail(mut self, detail: Detail) -> Self {
        self.detail = detail;
        self
    }

    pub fn with_flag(mut self, flag: ConfidenceFlag) -> Self {
        self.flags.insert(flag);
        self
    }

    pub fn with_flags(mut self, flags: impl IntoIterator<Item = ConfidenceFlag>) -> Self {
        self.flags.extend(flags);
        self
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn estimate(&self) -> Option<UtcTimestamp> {
        self.estimate
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn detail(&self) -> &Detail {
        &self.detail
    }

    pub fn flags(&self) -> &BTreeSet<ConfidenceFlag> {
        &self.flags
    }
}

/// Base URLs (and optional credentials) for each upstream service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Upstreams {
    /// The resource URI is appended verbatim.
    pub timemap_base: String,
    /// `link/lookup` and `info` are resolved against this.
    pub shortener_base: String,
    pub shortener_token: Option<String>,
    /// `trackbacks.json` is resolved against this.
    pub social_base: String,
    pub social_api_key: Option<String>,
    pub search_base: String,
    pub search_key: Option<String>,
    pub search_cx: Option<String>,
}

impl Default for Upstreams {
    fn default() -> Self {
        Upstreams {
            timemap_base: "http://timetravel.mementoweb.org/timemap/link/".into(),
            shortener_base: "https://api-ssl.bitly.com/v3/".into(),
            shortener_token: None,
            social_base: "http://otter.topsy.com/".into(),
            social_api_key: None,
            search_base: "https://www.googleapis.com/customsearch/v1".into(),
            search_key: None,
            search_cx: None,
        }
    }
}

impl Upstreams {
    pub fn timemap_url(&self, uri: &CanonicalUri) -> String {
        format!("{}{}", self.timemap_base, uri)
    }

    fn with_params(base: &str, path: &str, params: &[(&str, &str)]) -> String {
        let joined = format!("{}{}", base, path);
        match url::Url::parse_with_params(&joined, params) {
            Ok(u) => u.to_string(),
            Err(_) => joined,
        }
    }

    pub fn shortener_lookup_url(&self, uri: &CanonicalUri) -> String {
        let long = uri.request_url();
        let mut params = vec![("url", long.as_str())];
        if let Some(token) = &self.shortener_token {
            params.push(("access_token", token));
        }
        Self::with_params(&self.shortener_base, "link/lookup", &params)
    }

    pub fn shortener_info_url(&self, short_url: &str) -> String {
        let mut params = vec![("shortUrl", short_url)];
        if let Some(token) = &self.shortener_token {
            params.push(("access_token", token));
        }
        Self::with_params(&self.shortener_base, "info", &params)
    }

    pub fn social_url(&self, uri: &CanonicalUri) -> String {
        let long = uri.request_url();
        let limit = SOCIAL_POST_LIMIT.to_string();
        let mut params = vec![("url", long.as_str()), ("perpage", limit.as_str())];
        if let Some(key) = &self.social_api_key {
            params.push(("apikey", key));
        }
        Self::with_params(&self.social_base, "trackbacks.json", &params)
    }

    fn search_url(&self, query: &str, extra: &[(&str, &str)]) -> String {
        let mut params = vec![("q", query)];
        params.extend_from_slice(extra);
        if let Some(key) = &self.search_key {
            params.push(("key", key));
        }
        if let Some(cx) = &self.search_cx {
            params.push(("cx", cx));
        }
        Self::with_params(&self.search_base, "", &params)
    }

    /// Index lookup restricted to the last 15 years.
    pub fn search_index_url(&self, uri: &CanonicalUri) -> String {
        self.search_url(&uri.request_url(), &[("dateRestrict", "y15")])
    }

    pub fn backlinks_url(&self, uri: &CanonicalUri) -> String {
        self.search_url(&format!("link:{}", uri.request_url()), &[])
    }
}

/// Everything a source needs besides the URI.
#[derive(Clone, Copy)]
pub struct SourceContext<'a> {
    pub transport: &'a dyn Transport,
    pub window: PlausibilityWindow,
    pub upstreams: &'a Upstreams,
}

impl<'a> SourceContext<'a> {
    pub fn new(transport: &'a dyn Transport, window: PlausibilityWindow, upstreams: &'a Upstreams) -> Self {
        SourceContext {
            transport,
            window,
            upstreams,
        }
    }

    fn get(&self, url: &str) -> Result<HttpResponse, TransportError> {
        self.transport.send(&HttpRequest::get(url))
    }
}

fn fetch_json<T: serde::de::DeserializeOwned>(ctx: &SourceContext<'_>, url: &str) -> Result<T, String> {
    let response = ctx.get(url).map_err(|e| e.to_string())?;
    if !response.is_success() {
        return Err(format!("{url} returned status {}", response.status));
    }
    serde_json::from_str(&response.body).map_err(|e| format!("invalid JSON from {url}: {e}"))
}

pub trait EvidenceSource: Send + Sync {
    fn method(&self) -> Method;
    fn query(&self, uri: &CanonicalUri, ctx: &SourceContext<'_>) -> EvidenceResult;
}

type SourceFn = fn(&CanonicalUri, &SourceContext<'_>) -> EvidenceResult;

struct FnSource {
    method: Method,
    query: SourceFn,
}

impl EvidenceSource for FnSource {
    fn method(&self) -> Method {
        self.method
    }

    fn query(&self, uri: &CanonicalUri, ctx: &SourceContext<'_>) -> EvidenceResult {
        (self.query)(uri, ctx)
    }
}

/// Sources keyed by method, so an upstream can be replaced without touching
/// the aggregator.
pub struct SourceRegistry {
    sources: BTreeMap<Method, Box<dyn EvidenceSource>>,
}

impl Default for SourceRegistry {
    fn default() -> Self {
        let builtin: [(Method, SourceFn); 6] = [
            (Method::Archives, query_archives),
            (Method::Backlinks, query_backlinks),
            (Method::LastModified, probe_last_modified),
            (Method::SearchIndex, query_search_index),
            (Method::Shortener, query_shortener),
            (Method::Social, query_social),
        ];
        let mut registry = SourceRegistry::empty();
        for (method, query) in builtin {
            registry.register(Box::new(FnSource { method, query }));
        }
        registry
    }
}

impl SourceRegistry {
    pub fn empty() -> Self {
        SourceRegistry {
            sources: BTreeMap::new(),
        }
    }

    /// Installs `source`, replacing any previous source for its method.
    pub fn register(&mut self, source: Box<dyn EvidenceSource>) {
        self.sources.insert(source.method(), source);
    }

    pub fn get(&self, method: Method) -> Option<&dyn EvidenceSource> {
        self.sources.get(&method).map(|s| s.as_ref())
    }
}

/// Polls every enabled method, at most `parallelism` at a time. Returns one
/// result per enabled method in name order regardless of failures.
pub fn gather_evidence(
    uri: &CanonicalUri,
    ctx: &SourceContext<'_>,
    registry: &SourceRegistry,
    enabled: &BTreeSet<Method>,
    parallelism: usize,
) -> Vec<EvidenceResult> {
    let methods: Vec<Method> = enabled.iter().copied().collect();
    let run = |method: Method| match registry.get(method) {
        Some(source) => std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| source.query(uri, ctx)))
            .unwrap_or_else(|_| EvidenceResult::error(method, "source panicked")),
        None => EvidenceResult::error(method, "no source registered"),
    };
    crate::par::map_ordered(&methods, parallelism, |&m| run(m))
}
