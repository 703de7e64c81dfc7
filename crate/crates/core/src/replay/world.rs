//! Seeded synthetic worlds: resources with known creation dates, and a
//! cassette in which every upstream reports `creation + lag` for that
//! resource, so the end-to-end answer is known exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::model::{normalize_uri, truncate_to_day, CanonicalUri, UtcTimestamp, ARCHIVING_BEGAN};
use crate::sources::{Method, Upstreams};
use crate::transport::{HttpRequest, HttpResponse};

use super::{Cassette, CassetteError, Interaction};

const DAY: i64 = 86_400;
const HOUR: i64 = 3_600;
const ARCHIVE_HOSTS: [&str; 3] = [
    "web.archive.org",
    "wayback.archive-it.org",
    "webarchive.nationalarchives.gov.uk",
];

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("invalid lag model: {0}")]
    InvalidLagModel(String),
    #[error("world needs at least one resource")]
    NoResources,
    #[error(transparent)]
    Cassette(#[from] CassetteError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// How one source lags behind creation: absent with `absent_probability`,
/// otherwise a lag drawn uniformly from `[min_lag_secs, max_lag_secs]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceLag {
    pub absent_probability: f64,
    pub min_lag_secs: i64,
    pub max_lag_secs: i64,
}

impl SourceLag {
    pub fn fixed(lag_secs: i64, absent_probability: f64) -> Self {
        SourceLag {
            absent_probability,
            min_lag_secs: lag_secs,
            max_lag_secs: lag_secs,
        }
    }

    pub fn days(min_days: i64, max_days: i64, absent_probability: f64) -> Self {
        SourceLag {
            absent_probability,
            min_lag_secs: min_days * DAY,
            max_lag_secs: max_days * DAY,
        }
    }

    pub fn never() -> Self {
        SourceLag::fixed(0, 1.0)
    }
}

/// Lag distributions for every method plus the world's time frame.
///
/// Creation instants are drawn at midnight UTC between `creation_start` and
/// `creation_end`. The search index only knows days, so its lag bounds must
/// be whole days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagModel {
    pub lags: BTreeMap<Method, SourceLag>,
    pub creation_start: UtcTimestamp,
    pub creation_end: UtcTimestamp,
    pub now: UtcTimestamp,
}

impl Default for LagModel {
    /// Archives trail by hours to over a year; social posts by minutes to days.
    fn default() -> Self {
        let lags = BTreeMap::from([
            (
                Method::Archives,
                SourceLag {
                    absent_probability: 0.5,
                    min_lag_secs: 2 * HOUR,
                    max_lag_secs: 400 * DAY,
                },
            ),
            (Method::Backlinks, SourceLag::days(30, 700, 0.85)),
            (
                Method::LastModified,
                SourceLag {
                    absent_probability: 0.85,
                    min_lag_secs: 0,
                    max_lag_secs: 700 * DAY,
                },
            ),
            (Method::SearchIndex, SourceLag::days(0, 30, 0.4)),
            (
                Method::Shortener,
                SourceLag {
                    absent_probability: 0.55,
                    min_lag_secs: 60,
                    max_lag_secs: 7 * DAY,
                },
            ),
            (
                Method::Social,
                SourceLag {
                    absent_probability: 0.5,
                    min_lag_secs: 60,
                    max_lag_secs: 3 * DAY,
                },
            ),
        ]);
        LagModel {
            lags,
            creation_start: UtcTimestamp::from_ymd_hms(1998, 1, 1, 0, 0, 0).expect("valid date"),
            creation_end: UtcTimestamp::from_ymd_hms(2010, 12, 31, 0, 0, 0).expect("valid date"),
            now: UtcTimestamp::from_ymd_hms(2013, 3, 1, 0, 0, 0).expect("valid date"),
        }
    }
}

impl LagModel {
    pub fn with_lag(mut self, method: Method, lag: SourceLag) -> Self {
        self.lags.insert(method, lag);
        self
    }

    /// Every method present with zero lag.
    pub fn zero_lag() -> Self {
        let mut model = LagModel::default();
        for m in Method::ALL {
            model.lags.insert(m, SourceLag::fixed(0, 0.0));
        }
        model
    }

    fn lag(&self, method: Method) -> SourceLag {
        self.lags.get(&method).copied().unwrap_or_else(SourceLag::never)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let invalid = |msg: String| Err(WorldError::InvalidLagModel(msg));
        if self.creation_start < ARCHIVING_BEGAN {
            return invalid("creation_start precedes 1995".into());
        }
        if self.creation_start > self.creation_end {
            return invalid("creation_start after creation_end".into());
        }
        for m in Method::ALL {
            let lag = self.lag(m);
            if !(0.0..=1.0).contains(&lag.absent_probability) {
                return invalid(format!("{m}: absence probability {} outside [0, 1]", lag.absent_probability));
            }
            if lag.min_lag_secs < 0 || lag.max_lag_secs < 0 {
                return invalid(format!("{m}: negative lag bound"));
            }
            if lag.min_lag_secs > lag.max_lag_secs {
                return invalid(format!("{m}: min lag exceeds max lag"));
            }
            if m == Method::SearchIndex && (lag.min_lag_secs % DAY != 0 || lag.max_lag_secs % DAY != 0) {
                return invalid("search_index lag bounds must be whole days".into());
            }
            if self.creation_end.unix() + lag.max_lag_secs > self.now.unix() {
                return invalid(format!("{m}: creation_end + max lag is later than now"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldResource {
    pub uri: CanonicalUri,
    pub true_creation: UtcTimestamp,
    /// Lag in seconds per method; `None` when that source has no record.
    pub lags: BTreeMap<Method, Option<i64>>,
}

impl WorldResource {
    pub fn source_time(&self, method: Method) -> Option<UtcTimestamp> {
        self.lags
            .get(&method)
            .copied()
            .flatten()
            .map(|lag| self.true_creation.plus_secs(lag))
    }

    /// `true_creation + min` over present lags, optionally ignoring one method.
    pub fn expected_estimate(&self, excluding: Option<Method>) -> Option<UtcTimestamp> {
        self.lags
            .iter()
            .filter(|(m, _)| Some(**m) != excluding)
            .filter_map(|(_, lag)| *lag)
            .min()
            .map(|lag| self.true_creation.plus_secs(lag))
    }

    pub fn present(&self) -> impl Iterator<Item = Method> + '_ {
        self.lags.iter().filter(|(_, l)| l.is_some()).map(|(m, _)| *m)
    }
}

/// Ground truth for a generated cassette.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub seed: u64,
    pub now: UtcTimestamp,
    pub model: LagModel,
    pub resources: Vec<WorldResource>,
}

impl SyntheticWorld {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), WorldError> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn memento_stamp(t: UtcTimestamp) -> String {
    t.to_iso().replace(['-', 'T', ':'], "")
}

struct Emitter<'a> {
    cassette: Cassette,
    upstreams: &'a Upstreams,
}

impl Emitter<'_> {
    fn get(&mut self, url: String, content_type: &str, status: u16, body: String) -> Result<(), WorldError> {
        self.cassette.push_get(&url, status, content_type, body)?;
        Ok(())
    }

    fn json(&mut self, url: String, body: serde_json::Value) -> Result<(), WorldError> {
        self.get(url, "application/json", 200, body.to_string())
    }

    fn timemap(&mut self, original: &CanonicalUri, captures: &[(String, UtcTimestamp)]) -> Result<(), WorldError> {
        let url = self.upstreams.timemap_url(original);
        if captures.is_empty() {
            return self.get(url, "text/plain", 404, String::new());
        }
        let mut lines = vec![format!("<{}>; rel=\"original\"", original.request_url())];
        for (host, t) in captures {
            lines.push(format!(
                "<http://{host}/web/{}/{}>; rel=\"memento\"; datetime=\"{}\"",
                memento_stamp(*t),
                original.request_url(),
                t.to_http_date()
            ));
        }
        self.get(url, "application/link-format", 200, lines.join(",\n") + "\n")
    }
}

fn draw_lag(rng: &mut ChaCha8Rng, method: Method, lag: SourceLag) -> Option<i64> {
    if rng.random::<f64>() < lag.absent_probability {
        return None;
    }
    let secs = if method == Method::SearchIndex {
        rng.random_range(lag.min_lag_secs / DAY..=lag.max_lag_secs / DAY) * DAY
    } else {
        rng.random_range(lag.min_lag_secs..=lag.max_lag_secs)
    };
    Some(secs)
}

/// Distinct instants in `[lo, hi]`, `count` of them at most.
fn spread(rng: &mut ChaCha8Rng, lo: i64, hi: i64, count: usize) -> Vec<UtcTimestamp> {
    if hi < lo {
        return Vec::new();
    }
    let mut set = BTreeSet::new();
    for _ in 0..count {
        set.insert(rng.random_range(lo..=hi));
    }
    set.into_iter().map(UtcTimestamp::from_unix).collect()
}

/// Generates `n` resources and a cassette answering every upstream request
/// the six sources make for them. Pure in `(seed, n, model, upstreams)`.
pub fn generate_world(
    seed: u64,
    n: usize,
    model: &LagModel,
    upstreams: &Upstreams,
) -> Result<(SyntheticWorld, Cassette), WorldError> {
    if n == 0 {
        return Err(WorldError::NoResources);
    }
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut emit = Emitter {
        cassette: Cassette::new(model.now),
        upstreams,
    };
    let first_day = model.creation_start.unix().div_euclid(DAY);
    let last_day = model.creation_end.unix().div_euclid(DAY);
    let now = model.now.unix();

    let mut resources = Vec::with_capacity(n);
    for i in 0..n {
        let true_creation = UtcTimestamp::from_unix(rng.random_range(first_day..=last_day) * DAY);
        let uri = normalize_uri(&format!(
            "http://site{}.example.org/{}/item-{i}.html",
            i % 17,
            truncate_to_day(true_creation).year()
        ))
        .expect("generated URI is valid");
        let lags: BTreeMap<Method, Option<i64>> = Method::ALL
            .into_iter()
            .map(|m| (m, draw_lag(&mut rng, m, model.lag(m))))
            .collect();
        let resource = WorldResource {
            uri,
            true_creation,
            lags,
        };
        emit_resource(&mut emit, &mut rng, i, &resource, now)?;
        resources.push(resource);
    }

    let world = SyntheticWorld {
        seed,
        now: model.now,
        model: model.clone(),
        resources,
    };
    Ok((world, emit.cassette))
}

fn emit_resource(
    emit: &mut Emitter<'_>,
    rng: &mut ChaCha8Rng,
    i: usize,
    r: &WorldResource,
    now: i64,
) -> Result<(), WorldError> {
    let uri = &r.uri;
    let up = emit.upstreams;

    let mut head = HttpResponse::new(200).with_header("Content-Type", "text/html; charset=UTF-8");
    if let Some(t) = r.source_time(Method::LastModified) {
        head = head.with_header("Last-Modified", t.to_http_date());
    }
    emit.cassette.push(Interaction::ok(HttpRequest::head(uri.request_url()), head))?;

    let mut captures = Vec::new();
    if let Some(first) = r.source_time(Method::Archives) {
        captures.push((ARCHIVE_HOSTS[rng.random_range(0..ARCHIVE_HOSTS.len())], first));
        let later = rng.random_range(0..=4);
        for t in spread(rng, first.unix() + 1, now, later) {
            captures.push((ARCHIVE_HOSTS[rng.random_range(0..ARCHIVE_HOSTS.len())], t));
        }
    }
    let captures: Vec<(String, UtcTimestamp)> = captures.into_iter().map(|(h, t)| (h.to_string(), t)).collect();
    emit.timemap(uri, &captures)?;

    let lookup_url = up.shortener_lookup_url(uri);
    match r.source_time(Method::Shortener) {
        Some(t) => {
            let short = format!("http://bit.ly/w{i:x}");
            emit.json(
                lookup_url,
                json!({"status_code": 200, "data": {"link_lookup": [{"url": uri.request_url(), "aggregate_link": short}]}}),
            )?;
            emit.json(
                up.shortener_info_url(&short),
                json!({"status_code": 200, "data": {"info": [{"short_url": short, "created_at": t.unix()}]}}),
            )?;
        }
        None => emit.json(
            lookup_url,
            json!({"status_code": 200, "data": {"link_lookup": [{"url": uri.request_url(), "error": "NOT_FOUND"}]}}),
        )?,
    }

    let mut posts = Vec::new();
    if let Some(first) = r.source_time(Method::Social) {
        posts.push(first);
        let more = rng.random_range(0..=5);
        posts.extend(spread(rng, first.unix() + 1, now, more));
        posts.reverse();
    }
    let list: Vec<_> = posts
        .iter()
        .enumerate()
        .map(|(k, t)| json!({"date": t.unix(), "trackback_permalink": format!("http://twitter.com/u{k}/status/{}", t.unix())}))
        .collect();
    emit.json(up.social_url(uri), json!({"response": {"total": list.len(), "list": list}}))?;

    let items = match r.source_time(Method::SearchIndex) {
        Some(t) => json!([{"link": uri.request_url(), "crawl_date": truncate_to_day(t).to_string()}]),
        None => json!([]),
    };
    emit.json(up.search_index_url(uri), json!({ "items": items }))?;

    let mut pages = Vec::new();
    if let Some(first) = r.source_time(Method::Backlinks) {
        let count = rng.random_range(1..=2);
        for j in 0..count {
            let page = normalize_uri(&format!("http://links{j}.example.net/r{i}/p{j}.html")).expect("valid page");
            // The first page carries the earliest link; others link later.
            let linked_at = if j == 0 {
                first
            } else {
                UtcTimestamp::from_unix(rng.random_range(first.unix()..=now))
            };
            emit_backlink_page(emit, rng, &page, uri, linked_at, now)?;
            pages.push(page);
        }
    }
    let items: Vec<_> = pages.iter().map(|p| json!({"link": p.request_url()})).collect();
    emit.json(up.backlinks_url(uri), json!({ "items": items }))?;
    Ok(())
}

/// A backlink page whose captures link to `target` from `linked_at` onward.
fn emit_backlink_page(
    emit: &mut Emitter<'_>,
    rng: &mut ChaCha8Rng,
    page: &CanonicalUri,
    target: &CanonicalUri,
    linked_at: UtcTimestamp,
    now: i64,
) -> Result<(), WorldError> {
    let before_lo = (linked_at.unix() - 3 * 365 * DAY).max(ARCHIVING_BEGAN.unix());
    let n_before = rng.random_range(0..=12);
    let before = spread(rng, before_lo, linked_at.unix() - 1, n_before);
    let n_after = rng.random_range(0..=12);
    let after = spread(rng, linked_at.unix() + 1, now, n_after);
    let mut times = before;
    times.push(linked_at);
    times.extend(after);

    let captures: Vec<(String, UtcTimestamp)> = times.iter().map(|&t| ("web.archive.org".to_string(), t)).collect();
    emit.timemap(page, &captures)?;
    for (k, &t) in times.iter().enumerate() {
        let capture = format!("http://web.archive.org/web/{}/{}", memento_stamp(t), page.request_url());
        let body = if t >= linked_at {
            // Alternate plain and archive-rewritten hrefs.
            let href = if k % 2 == 0 {
                target.request_url()
            } else {
                format!("/web/{}/{}", memento_stamp(t), target.request_url())
            };
            format!("<html><body><a href=\"/\">home</a> <a href=\"{href}\">source</a></body></html>")
        } else {
            "<html><body><a href=\"/\">home</a> nothing yet</body></html>".to_string()
        };
        emit.get(capture, "text/html", 200, body)?;
    }
    Ok(())
}
