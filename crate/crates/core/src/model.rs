//! Identifier and time primitives shared by every evidence source.
//!
//! All instants are stored as whole seconds since the Unix epoch in UTC.
//! Evaluation works at day granularity, so [`DayDate`] is the unit the
//! harness compares in.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("malformed URI: {0:?}")]
    MalformedUri(String),
    #[error("unparsable date: {0:?}")]
    UnparsableDate(String),
    #[error("invalid plausibility window: earliest {earliest} is not before now {now}")]
    InvalidWindow { earliest: UtcTimestamp, now: UtcTimestamp },
}

const SECONDS_PER_DAY: i64 = 86_400;

/// An absolute `http`/`https` resource identifier in canonical form.
///
/// Scheme and host are lowercase, default ports are dropped, an empty path
/// becomes `/` and the fragment is discarded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalUri {
    scheme: String,
    host: String,
    port: Option<u16>,
    path: String,
    query: Option<String>,
}

impl CanonicalUri {
    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    pub fn host(&self) -> &str {
        &self.host
    }

    pub fn port(&self) -> Option<u16> {
        self.port
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn query(&self) -> Option<&str> {
        self.query.as_deref()
    }

    fn authority(&self) -> String {
        match self.port {
            Some(port) => format!("{}://{}:{}", self.scheme, self.host, port),
            None => format!("{}://{}", self.scheme, self.host),
        }
    }

    /// Full form with an explicit path, suitable for issuing requests.
    pub fn request_url(&self) -> String {
        let mut out = self.authority();
        out.push_str(&self.path);
        if let Some(q) = &self.query {
            out.push('?');
            out.push_str(q);
        }
        out
    }

    /// Parsed `url::Url` view of [`request_url`](Self::request_url).
    pub fn to_url(&self) -> url::Url {
        url::Url::parse(&self.request_url()).expect("canonical URI always re-parses")
    }
}

/// Displays the compact form: a bare root path is omitted, so
/// `http://www.mementoweb.org/` renders as `http://www.mementoweb.org`.
impl fmt::Display for CanonicalUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path == "/" && self.query.is_none() {
            f.write_str(&self.authority())
        } else {
            f.write_str(&self.request_url())
        }
    }
}

impl FromStr for CanonicalUri {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_uri(s)
    }
}

impl Serialize for CanonicalUri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CanonicalUri {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        normalize_uri(&raw).map_err(serde::de::Error::custom)
    }
}

/// Normalizes `raw` into a [`CanonicalUri`].
pub fn normalize_uri(raw: &str) -> Result<CanonicalUri, ModelError> {
    let trimmed = raw.trim();
    let malformed = || ModelError::MalformedUri(raw.to_string());
    let url = url::Url::parse(trimmed).map_err(|_| malformed())?;
    canonical_from_url(&url).ok_or_else(malformed)
}

pub(crate) fn canonical_from_url(url: &url::Url) -> Option<CanonicalUri> {
    let scheme = url.scheme();
    if scheme != "http" && scheme != "https" {
        return None;
    }
    let host = url.host_str().filter(|h| !h.is_empty())?.to_ascii_lowercase();
    let path = match url.path() {
        "" => "/".to_string(),
        p => uppercase_percent_escapes(p),
    };
    let query = url
        .query()
        .filter(|q| !q.is_empty())
        .map(uppercase_percent_escapes);
    Some(CanonicalUri {
        scheme: scheme.to_string(),
        host,
        // `Url::port` is already `None` for the scheme default.
        port: url.port(),
        path,
        query,
    })
}

fn uppercase_percent_escapes(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%'
            && i + 2 < bytes.len()
            && bytes[i + 1].is_ascii_hexdigit()
            && bytes[i + 2].is_ascii_hexdigit()
        {
            out.push('%');
            out.push(bytes[i + 1].to_ascii_uppercase() as char);
            out.push(bytes[i + 2].to_ascii_uppercase() as char);
            i += 3;
        } else {
            let ch = s[i..].chars().next().expect("index on char boundary");
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    out
}

/// A UTC instant at one-second resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UtcTimestamp(i64);

impl UtcTimestamp {
    pub const EPOCH: UtcTimestamp = UtcTimestamp(0);

    pub const fn from_unix(secs: i64) -> Self {
        UtcTimestamp(secs)
    }

    pub const fn unix(self) -> i64 {
        self.0
    }

    /// Builds an instant from calendar fields; `None` for an invalid date or time.
    pub fn from_ymd_hms(y: i32, mo: u32, d: u32, h: u32, mi: u32, s: u32) -> Option<Self> {
        let dt = NaiveDate::from_ymd_opt(y, mo, d)?.and_hms_opt(h, mi, s)?;
        Some(Self::from_naive(dt))
    }

    fn from_naive(dt: NaiveDateTime) -> Self {
        UtcTimestamp(dt.and_utc().timestamp())
    }

    fn to_datetime(self) -> DateTime<Utc> {
        DateTime::from_timestamp(self.0, 0).expect("timestamp within chrono range")
    }

    pub fn plus_secs(self, secs: i64) -> Self {
        UtcTimestamp(self.0 + secs)
    }

    /// Renders as `YYYY-MM-DDTHH:MM:SS`, without a zone suffix.
    pub fn to_iso(self) -> String {
        self.to_datetime().format("%Y-%m-%dT%H:%M:%S").to_string()
    }

    /// Renders as an RFC 1123 HTTP-date, e.g. `Wed, 27 Feb 2013 17:27:20 GMT`.
    pub fn to_http_date(self) -> String {
        self.to_datetime()
            .format("%a, %d %b %Y %H:%M:%S GMT")
            .to_string()
    }

    /// Parses `YYYY-MM-DDTHH:MM:SS`, optionally followed by `Z`, or a bare
    /// `YYYY-MM-DD` (taken as midnight).
    pub fn parse_iso(s: &str) -> Result<Self, ModelError> {
        let s = s.trim();
        let body = s.strip_suffix('Z').unwrap_or(s);
        if let Ok(dt) = NaiveDateTime::parse_from_str(body, "%Y-%m-%dT%H:%M:%S") {
            return Ok(Self::from_naive(dt));
        }
        DayDate::parse(s)
            .map(DayDate::midnight)
            .map_err(|_| ModelError::UnparsableDate(s.to_string()))
    }
}

impl fmt::Display for UtcTimestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso())
    }
}

impl Serialize for UtcTimestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for UtcTimestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        UtcTimestamp::parse_iso(&raw).map_err(serde::de::Error::custom)
    }
}

/// A UTC calendar date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DayDate(NaiveDate);

impl DayDate {
    pub fn from_ymd(y: i32, m: u32, d: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(y, m, d).map(DayDate)
    }

    /// Strict `YYYY-MM-DD`.
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        let err = || ModelError::UnparsableDate(s.to_string());
        let b = s.as_bytes();
        let shape_ok = b.len() == 10
            && b[4] == b'-'
            && b[7] == b'-'
            && b.iter()
                .enumerate()
                .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
        if !shape_ok {
            return Err(err());
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map(DayDate)
            .map_err(|_| err())
    }

    pub fn year(self) -> i32 {
        self.0.year()
    }

    pub fn month(self) -> u32 {
        self.0.month()
    }

    pub fn day(self) -> u32 {
        self.0.day()
    }

    /// 00:00:00Z on this date.
    pub fn midnight(self) -> UtcTimestamp {
        UtcTimestamp::from_naive(self.0.and_hms_opt(0, 0, 0).expect("midnight is valid"))
    }

    /// Signed number of calendar days from `self` to `other`.
    pub fn days_until(self, other: DayDate) -> i64 {
        (other.0 - self.0).num_days()
    }
}

impl fmt::Display for DayDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%d"))
    }
}

impl FromStr for DayDate {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DayDate::parse(s)
    }
}

impl Serialize for DayDate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DayDate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        DayDate::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// The UTC calendar date containing `t`.
pub fn truncate_to_day(t: UtcTimestamp) -> DayDate {
    let days = t.unix().div_euclid(SECONDS_PER_DAY);
    let midnight = UtcTimestamp(days * SECONDS_PER_DAY).to_datetime();
    DayDate(midnight.date_naive())
}

/// 1995-01-01T00:00:00Z, when public web archiving began.
pub const ARCHIVING_BEGAN: UtcTimestamp = UtcTimestamp(788_918_400);

/// The closed interval `[earliest, now]` an evidence timestamp must fall in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlausibilityWindow {
    earliest: UtcTimestamp,
    now: UtcTimestamp,
}

impl PlausibilityWindow {
    /// Window from [`ARCHIVING_BEGAN`] up to `now`.
    pub fn until(now: UtcTimestamp) -> Result<Self, ModelError> {
        Self::new(ARCHIVING_BEGAN, now)
    }

    pub fn new(earliest: UtcTimestamp, now: UtcTimestamp) -> Result<Self, ModelError> {
        if earliest < now {
            Ok(PlausibilityWindow { earliest, now })
        } else {
            Err(ModelError::InvalidWindow { earliest, now })
        }
    }

    pub fn earliest(&self) -> UtcTimestamp {
        self.earliest
    }

    pub fn now(&self) -> UtcTimestamp {
        self.now
    }

    pub fn contains(&self, t: UtcTimestamp) -> bool {
        self.earliest <= t && t <= self.now
    }
}

/// Returns `t` if it lies within `w`.
pub fn filter_plausible(t: UtcTimestamp, w: &PlausibilityWindow) -> Option<UtcTimestamp> {
    w.contains(t).then_some(t)
}

/// Source of "now". Always injected so replayed runs are reproducible.
pub trait Clock: Send + Sync {
    fn now(&self) -> UtcTimestamp;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> UtcTimestamp {
        UtcTimestamp(Utc::now().timestamp())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub UtcTimestamp);

impl Clock for FixedClock {
    fn now(&self) -> UtcTimestamp {
        self.0
    }
}

const MONTHS: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];
const SHORT_DAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
const LONG_DAYS: [&str; 7] = [
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
];

fn month_number(token: &str) -> Option<u32> {
    MONTHS
        .iter()
        .position(|m| m.eq_ignore_ascii_case(token))
        .map(|i| i as u32 + 1)
}

fn parse_clock(token: &str) -> Option<(u32, u32, u32)> {
    let mut it = token.split(':');
    let mut next = || -> Option<u32> {
        let part = it.next()?;
        (part.len() == 2 && part.bytes().all(|b| b.is_ascii_digit()))
            .then(|| part.parse().ok())
            .flatten()
    };
    let hms = (next()?, next()?, next()?);
    it.next().is_none().then_some(hms)
}

fn parse_number(token: &str, min_len: usize, max_len: usize) -> Option<u32> {
    let ok = (min_len..=max_len).contains(&token.len()) && token.bytes().all(|b| b.is_ascii_digit());
    ok.then(|| token.parse().ok()).flatten()
}

fn is_utc_zone(token: &str) -> bool {
    token == "GMT" || token == "UTC"
}

/// Parses an HTTP-date in RFC 1123, RFC 850 or asctime form.
///
/// Two-digit RFC 850 years pivot at 70: `70..=99` map to 19xx, `00..=69` to 20xx.
/// The weekday name must be well formed but is not checked against the date.
pub fn parse_http_date(s: &str) -> Result<UtcTimestamp, ModelError> {
    let err = || ModelError::UnparsableDate(s.to_string());
    let trimmed = s.trim();
    let fields = parse_rfc1123(trimmed)
        .or_else(|| parse_rfc850(trimmed))
        .or_else(|| parse_asctime(trimmed))
        .ok_or_else(err)?;
    let (y, mo, d, (h, mi, se)) = fields;
    UtcTimestamp::from_ymd_hms(y, mo, d, h, mi, se).ok_or_else(err)
}

type DateFields = (i32, u32, u32, (u32, u32, u32));

// Wed, 27 Feb 2013 17:27:20 GMT
fn parse_rfc1123(s: &str) -> Option<DateFields> {
    let (wkday, rest) = s.split_once(", ")?;
    if !SHORT_DAYS.contains(&wkday) {
        return None;
    }
    let parts: Vec<&str> = rest.split(' ').collect();
    let [day, mon, year, clock, zone] = parts.as_slice() else {
        return None;
    };
    if !is_utc_zone(zone) {
        return None;
    }
    Some((
        parse_number(year, 4, 4)? as i32,
        month_number(mon)?,
        parse_number(day, 1, 2)?,
        parse_clock(clock)?,
    ))
}

// Sunday, 06-Nov-94 08:49:37 GMT
fn parse_rfc850(s: &str) -> Option<DateFields> {
    let (weekday, rest) = s.split_once(", ")?;
    if !LONG_DAYS.contains(&weekday) {
        return None;
    }
    let parts: Vec<&str> = rest.split(' ').collect();
    let [date, clock, zone] = parts.as_slice() else {
        return None;
    };
    if !is_utc_zone(zone) {
        return None;
    }
    let dparts: Vec<&str> = date.split('-').collect();
    let [day, mon, yy] = dparts.as_slice() else {
        return None;
    };
    let yy = parse_number(yy, 2, 2)? as i32;
    let year = if yy >= 70 { 1900 + yy } else { 2000 + yy };
    Some((
        year,
        month_number(mon)?,
        parse_number(day, 2, 2)?,
        parse_clock(clock)?,
    ))
}

// Sun Nov  6 08:49:37 1994
fn parse_asctime(s: &str) -> Option<DateFields> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let [wkday, mon, day, clock, year] = parts.as_slice() else {
        return None;
    };
    if !SHORT_DAYS.contains(wkday) {
        return None;
    }
    Some((
        parse_number(year, 4, 4)? as i32,
        month_number(mon)?,
        parse_number(day, 1, 2)?,
        parse_clock(clock)?,
    ))
}
