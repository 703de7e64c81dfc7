//! Memento timemaps: parsing `application/link-format`, picking the first
//! capture, and locating the first capture of a backlink page that links to
//! a target.

use std::sync::OnceLock;

use regex::Regex;

use crate::model::{
    canonical_from_url, filter_plausible, normalize_uri, parse_http_date, CanonicalUri,
    PlausibilityWindow, UtcTimestamp,
};
use crate::transport::TransportError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimemapError {
    #[error("timemap contains no parsable link entries")]
    MalformedTimemap,
}

/// One archived capture of a resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memento {
    pub archive_host: String,
    pub capture_uri: String,
    pub memento_datetime: UtcTimestamp,
    /// The original server's `Last-Modified`, when the archive exposes it.
    pub original_last_modified: Option<UtcTimestamp>,
}

impl Memento {
    fn sort_key(&self) -> (UtcTimestamp, &str, &str) {
        (self.memento_datetime, &self.archive_host, &self.capture_uri)
    }
}

/// Captures of `original`, ascending by `memento_datetime`, then archive host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timemap {
    pub original: CanonicalUri,
    mementos: Vec<Memento>,
}

impl Timemap {
    pub fn new(original: CanonicalUri, mut mementos: Vec<Memento>) -> Self {
        mementos.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Timemap { original, mementos }
    }

    pub fn mementos(&self) -> &[Memento] {
        &self.mementos
    }

    pub fn len(&self) -> usize {
        self.mementos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mementos.is_empty()
    }
}

/// A single `<target>; param=value; ...` entry of a link-format document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkEntry {
    pub target: String,
    pub params: Vec<(String, String)>,
}

impl LinkEntry {
    pub fn param(&self, name: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn has_rel(&self, rel: &str) -> bool {
        self.param("rel")
            .is_some_and(|v| v.split_ascii_whitespace().any(|r| r.eq_ignore_ascii_case(rel)))
    }
}

/// Splits a link-format body into entries. Unparsable entries are skipped.
pub fn parse_link_format(body: &str) -> Vec<LinkEntry> {
    let mut entries = Vec::new();
    let mut chars = body.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '<' {
            continue;
        }
        let Some(end) = body[i + 1..].find('>') else {
            break;
        };
        let target = body[i + 1..i + 1 + end].trim().to_string();
        // Parameters run until the next comma outside quotes.
        let rest_start = i + 1 + end + 1;
        let mut in_quotes = false;
        let mut rest_end = body.len();
        for (j, ch) in body[rest_start..].char_indices() {
            match ch {
                '"' => in_quotes = !in_quotes,
                ',' if !in_quotes => {
                    rest_end = rest_start + j;
                    break;
                }
                _ => {}
            }
        }
        let raw_params = body[rest_start..rest_end].trim_start();
        if !target.is_empty() && (raw_params.is_empty() || raw_params.starts_with(';')) {
            entries.push(LinkEntry {
                target,
                params: parse_params(raw_params),
            });
        }
        while chars.peek().is_some_and(|&(k, _)| k < rest_end) {
            chars.next();
        }
    }
    entries
}

fn parse_params(raw: &str) -> Vec<(String, String)> {
    let mut params = Vec::new();
    let mut in_quotes = false;
    let mut start = 0;
    let mut pieces = Vec::new();
    for (i, ch) in raw.char_indices() {
        match ch {
            '"' => in_quotes = !in_quotes,
            ';' if !in_quotes => {
                pieces.push(&raw[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(&raw[start..]);
    for piece in pieces {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let (name, value) = match piece.split_once('=') {
            Some((n, v)) => (n.trim(), v.trim().trim_matches('"')),
            None => (piece, ""),
        };
        params.push((name.to_ascii_lowercase(), value.to_string()));
    }
    params
}

/// Parses a timemap body, keeping entries whose `rel` includes `memento` and
/// whose `datetime` parses. An optional `last-modified` attribute carries the
/// original resource's `Last-Modified` as seen at capture time.
pub fn parse_timemap(body: &str, original: &CanonicalUri) -> Result<Timemap, TimemapError> {
    let entries = parse_link_format(body);
    if entries.is_empty() {
        return Err(TimemapError::MalformedTimemap);
    }
    let mementos = entries
        .iter()
        .filter(|e| e.has_rel("memento"))
        .filter_map(|e| {
            let memento_datetime = parse_http_date(e.param("datetime")?).ok()?;
            let archive_host = url::Url::parse(&e.target)
                .ok()?
                .host_str()?
                .to_ascii_lowercase();
            Some(Memento {
                archive_host,
                capture_uri: e.target.clone(),
                memento_datetime,
                original_last_modified: e
                    .param("last-modified")
                    .and_then(|v| parse_http_date(v).ok()),
            })
        })
        .collect();
    Ok(Timemap::new(original.clone(), mementos))
}

/// Lowest plausible date a single memento vouches for: the smaller of its
/// capture time and original `Last-Modified`, each filtered first.
pub fn memento_candidate(m: &Memento, w: &PlausibilityWindow) -> Option<UtcTimestamp> {
    let capture = filter_plausible(m.memento_datetime, w);
    let original = m.original_last_modified.and_then(|t| filter_plausible(t, w));
    match (capture, original) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EarliestCapture<'a> {
    pub memento: &'a Memento,
    pub candidate: UtcTimestamp,
}

/// The memento with the minimal plausible candidate date. Ties go to the
/// lexicographically smaller archive host.
pub fn earliest_memento<'a>(tm: &'a Timemap, w: &PlausibilityWindow) -> Option<EarliestCapture<'a>> {
    tm.mementos
        .iter()
        .filter_map(|m| memento_candidate(m, w).map(|candidate| EarliestCapture { memento: m, candidate }))
        .min_by(|a, b| {
            (a.candidate, &a.memento.archive_host, &a.memento.capture_uri).cmp(&(
                b.candidate,
                &b.memento.archive_host,
                &b.memento.capture_uri,
            ))
        })
}

/// Outcome of [`first_linking_memento`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSearch {
    /// Index into the timemap of the first capture found to link to the target.
    pub index: Option<usize>,
    pub first_linked: Option<UtcTimestamp>,
    pub fetches: usize,
    /// Fetches that failed and were counted as "link absent".
    pub failed_fetches: usize,
}

impl LinkSearch {
    pub fn degraded(&self) -> bool {
        self.failed_fetches > 0
    }
}

/// Binary search for the first capture whose body links to `target`.
///
/// Assumes link presence is monotone over the captures. When it is not, the
/// result is whichever boundary the search lands on. Uses at most
/// `ceil(log2(n + 1))` fetches, which never exceeds `ceil(log2(n)) + 1`.
pub fn first_linking_memento<F>(tm: &Timemap, target: &CanonicalUri, mut fetch: F) -> LinkSearch
where
    F: FnMut(&Memento) -> Result<String, TransportError>,
{
    let mementos = tm.mementos();
    let mut fetches = 0;
    let mut failed_fetches = 0;
    let (mut lo, mut hi) = (0usize, mementos.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        fetches += 1;
        let linked = match fetch(&mementos[mid]) {
            Ok(body) => contains_link(&body, target, Some(&tm.original)),
            Err(_) => {
                failed_fetches += 1;
                false
            }
        };
        if linked {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let index = (lo < mementos.len()).then_some(lo);
    LinkSearch {
        index,
        first_linked: index.map(|i| mementos[i].memento_datetime),
        fetches,
        failed_fetches,
    }
}

fn href_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"(?is)<a\b[^>]*?\bhref\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s"'>]+))"#)
            .expect("valid href regex")
    })
}

fn rewritten_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)/\d{14}(?:[a-z]{2}_)?/(https?://.+)$").expect("valid rewrite regex")
    })
}

/// If `href` is an archive-rewritten link (`.../<14 digits>/<original>`),
/// returns the embedded original URI.
pub fn strip_archive_prefix(href: &str) -> Option<&str> {
    rewritten_regex()
        .captures(href)
        .and_then(|c| c.get(1))
        .map(|m| m.as_str())
}

/// Whether any anchor in `body` points at `target`. Relative hrefs resolve
/// against `base`.
pub fn contains_link(body: &str, target: &CanonicalUri, base: Option<&CanonicalUri>) -> bool {
    let base_url = base.map(CanonicalUri::to_url);
    href_regex().captures_iter(body).any(|caps| {
        let raw = caps
            .get(1)
            .or_else(|| caps.get(2))
            .or_else(|| caps.get(3))
            .map_or("", |m| m.as_str());
        let href = raw.trim().replace("&amp;", "&");
        resolve_href(&href, base_url.as_ref()).is_some_and(|u| &u == target)
    })
}

fn resolve_href(href: &str, base: Option<&url::Url>) -> Option<CanonicalUri> {
    if let Some(original) = strip_archive_prefix(href) {
        return normalize_uri(original).ok();
    }
    match url::Url::parse(href) {
        Ok(u) => canonical_from_url(&u),
        Err(url::ParseError::RelativeUrlWithoutBase) => {
            canonical_from_url(&base?.join(href).ok()?)
        }
        Err(_) => None,
    }
}
