//! Cassettes: recorded upstream interactions, replayed for offline runs.
//!
//! On disk a cassette is UTF-8 JSON lines. The first line is a header
//! `{"version":1,"recorded_at":...,"volatile_headers":[...]}`; every further
//! line is one [`Interaction`]. Interactions are keyed by HTTP method,
//! normalized URL and the request headers not listed as volatile.

mod world;

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::model::UtcTimestamp;
use crate::transport::{HttpMethod, HttpRequest, HttpResponse, Transport, TransportError};

pub use world::{generate_world, LagModel, SourceLag, SyntheticWorld, WorldError, WorldResource};

pub const CASSETTE_VERSION: u32 = 1;

/// Headers that never take part in matching and are not recorded on requests.
pub const DEFAULT_VOLATILE_HEADERS: [&str; 6] = [
    "date",
    "user-agent",
    "x-request-id",
    "x-correlation-id",
    "cookie",
    "authorization",
];

#[derive(Debug, thiserror::Error)]
pub enum CassetteError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("cassette line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cassette line {line}: duplicate interaction {key}")]
    DuplicateInteraction { line: usize, key: String },
    #[error("cassette line {line}: status {status} outside 100..=599")]
    InvalidStatus { line: usize, status: u16 },
    #[error("unsupported cassette version {0}")]
    UnsupportedVersion(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CassetteHeader {
    version: u32,
    recorded_at: UtcTimestamp,
    volatile_headers: Vec<String>,
}

/// One request with either the response received or the error raised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub request: HttpRequest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<HttpResponse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Interaction {
    pub fn ok(request: HttpRequest, response: HttpResponse) -> Self {
        Interaction {
            request,
            response: Some(response),
            error: None,
        }
    }

    pub fn failed(request: HttpRequest, error: impl Into<String>) -> Self {
        Interaction {
            request,
            response: None,
            error: Some(error.into()),
        }
    }

    fn outcome(&self) -> Result<HttpResponse, TransportError> {
        match (&self.response, &self.error) {
            (Some(r), _) => Ok(r.clone()),
            (None, e) => Err(TransportError::Failed {
                url: self.request.url.clone(),
                message: e.clone().unwrap_or_else(|| "recorded without response".into()),
            }),
        }
    }
}

fn normalize_url(raw: &str) -> String {
    match url::Url::parse(raw) {
        Ok(mut u) => {
            u.set_fragment(None);
            u.to_string()
        }
        Err(_) => raw.to_string(),
    }
}

/// Recorded interactions plus the index used for matching.
#[derive(Debug, Clone)]
pub struct Cassette {
    pub recorded_at: UtcTimestamp,
    volatile_headers: Vec<String>,
    entries: Vec<Interaction>,
    index: HashMap<String, usize>,
}

impl Cassette {
    pub fn new(recorded_at: UtcTimestamp) -> Self {
        Cassette {
            recorded_at,
            volatile_headers: DEFAULT_VOLATILE_HEADERS.iter().map(|h| h.to_string()).collect(),
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn volatile_headers(&self) -> &[String] {
        &self.volatile_headers
    }

    fn is_volatile(&self, name: &str) -> bool {
        self.volatile_headers.iter().any(|h| h.eq_ignore_ascii_case(name))
    }

    /// Matching key: method and normalized URL followed by sorted non-volatile headers.
    pub fn key_for(&self, request: &HttpRequest) -> String {
        let mut headers: Vec<String> = request
            .headers
            .iter()
            .filter(|(k, _)| !self.is_volatile(k))
            .map(|(k, v)| format!("{}={}", k.to_ascii_lowercase(), v))
            .collect();
        headers.sort();
        let mut key = format!("{} {}", request.method, normalize_url(&request.url));
        for h in headers {
            key.push(' ');
            key.push_str(&h);
        }
        key
    }

    fn strip_volatile(&self, mut request: HttpRequest) -> HttpRequest {
        request.headers.retain(|(k, _)| !self.is_volatile(k));
        request
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Interaction] {
        &self.entries
    }

    pub fn contains(&self, request: &HttpRequest) -> bool {
        self.index.contains_key(&self.key_for(request))
    }

    /// Appends an interaction; its key must not already be present.
    pub fn push(&mut self, interaction: Interaction) -> Result<(), CassetteError> {
        self.push_at(interaction, self.entries.len() + 2)
    }

    fn push_at(&mut self, interaction: Interaction, line: usize) -> Result<(), CassetteError> {
        if let Some(r) = &interaction.response {
            if !(100..=599).contains(&r.status) {
                return Err(CassetteError::InvalidStatus { line, status: r.status });
            }
        }
        let interaction = Interaction {
            request: self.strip_volatile(interaction.request),
            ..interaction
        };
        let key = self.key_for(&interaction.request);
        if self.index.contains_key(&key) {
            return Err(CassetteError::DuplicateInteraction { line, key });
        }
        self.index.insert(key, self.entries.len());
        self.entries.push(interaction);
        Ok(())
    }

    /// Convenience for building fixtures: a `GET` answered with `status` and `body`.
    pub fn push_get(&mut self, url: &str, status: u16, content_type: &str, body: String) -> Result<(), CassetteError> {
        self.push(Interaction::ok(
            HttpRequest::get(url),
            HttpResponse::new(status)
                .with_header("Content-Type", content_type)
                .with_body(body),
        ))
    }

    pub fn from_jsonl(text: &str) -> Result<Self, CassetteError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header_line) = lines.next().ok_or(CassetteError::Parse {
            line: 1,
            message: "missing header line".into(),
        })?;
        let header: CassetteHeader = serde_json::from_str(header_line).map_err(|e| CassetteError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        if header.version != CASSETTE_VERSION {
            return Err(CassetteError::UnsupportedVersion(header.version));
        }
        let mut cassette = Cassette {
            recorded_at: header.recorded_at,
            volatile_headers: header.volatile_headers,
            entries: Vec::new(),
            index: HashMap::new(),
        };
        for (line, text) in lines {
            let interaction: Interaction = serde_json::from_str(text).map_err(|e| CassetteError::Parse {
                line,
                message: e.to_string(),
            })?;
            cassette.push_at(interaction, line)?;
        }
        Ok(cassette)
    }

    pub fn to_jsonl(&self) -> String {
        let header = CassetteHeader {
            version: CASSETTE_VERSION,
            recorded_at: self.recorded_at,
            volatile_headers: self.volatile_headers.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("interaction serializes"));
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CassetteError> {
        Self::from_jsonl(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CassetteError> {
        fs::write(path, self.to_jsonl())?;
        Ok(())
    }
}

/// The recorded outcome for `request`, or `UnmatchedInteraction` naming the key.
pub fn replay_lookup(cassette: &Cassette, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
    let key = cassette.key_for(request);
    match cassette.index.get(&key) {
        Some(&i) => {
            let mut response = cassette.entries[i].outcome()?;
            if request.method == HttpMethod::Head {
                response.body.clear();
            }
            Ok(response)
        }
        None => Err(TransportError::UnmatchedInteraction(key)),
    }
}

impl Transport for Cassette {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        replay_lookup(self, request)
    }
}

/// Wraps a live transport and appends every new interaction to a cassette.
/// Repeated requests are answered from the cassette.
pub struct RecordingTransport<T> {
    live: T,
    sink: Mutex<Cassette>,
}

pub fn record_passthrough<T: Transport>(live: T, sink: Cassette) -> RecordingTransport<T> {
    RecordingTransport {
        live,
        sink: Mutex::new(sink),
    }
}

impl<T> RecordingTransport<T> {
    pub fn cassette(&self) -> Cassette {
        self.sink.lock().expect("cassette lock poisoned").clone()
    }

    pub fn into_cassette(self) -> Cassette {
        self.sink.into_inner().expect("cassette lock poisoned")
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        {
            let sink = self.sink.lock().expect("cassette lock poisoned");
            if sink.contains(request) {
                return replay_lookup(&sink, request);
            }
        }
        let outcome = self.live.send(request);
        let interaction = match &outcome {
            Ok(r) => Interaction::ok(request.clone(), r.clone()),
            Err(e) => Interaction::failed(request.clone(), e.to_string()),
        };
        let mut sink = self.sink.lock().expect("cassette lock poisoned");
        if sink.contains(request) {
            // A concurrent caller recorded it first; keep that entry.
            return replay_lookup(&sink, request);
        }
        sink.push(interaction).expect("key checked absent under lock");
        outcome
    }
}
