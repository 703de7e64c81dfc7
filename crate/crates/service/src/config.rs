use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use carbondate::replay::{record_passthrough, CassetteError};
use carbondate::sources::UnknownMethod;
use carbondate::{
    Cassette, Estimator, FixedClock, HttpRequest, HttpResponse, LiveTransport, Method, RecordingTransport,
    ReportFormat, SystemClock, Transport, TransportError, Upstreams, UtcTimestamp,
};
use serde::{Deserialize, Serialize};

/// Environment variable naming a JSON file with a [`ServiceConfig`].
pub const CONFIG_ENV: &str = "CARBONDATE_CONFIG";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "path")]
pub enum TransportMode {
    Live,
    Replay(PathBuf),
    Record(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: String,
    pub sources: Vec<Method>,
    /// Per-request upstream timeout; must be positive.
    pub timeout_ms: u64,
    /// Sources queried concurrently per URI; at least 1.
    pub parallelism: usize,
    pub transport: TransportMode,
    /// Fixed "now" for the plausibility window; the system clock otherwise.
    pub now: Option<UtcTimestamp>,
    pub format: ReportFormat,
    pub upstreams: Upstreams,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: "127.0.0.1:8080".into(),
            sources: Method::ALL.to_vec(),
            timeout_ms: 10_000,
            parallelism: Method::ALL.len(),
            transport: TransportMode::Live,
            now: None,
            format: ReportFormat::Legacy,
            upstreams: Upstreams::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("timeout must be positive")]
    ZeroTimeout,
    #[error("parallelism must be at least 1")]
    ZeroParallelism,
    #[error("no sources enabled")]
    NoSources,
    #[error(transparent)]
    UnknownMethod(#[from] UnknownMethod),
    #[error("loading cassette {path}: {source}")]
    Cassette { path: PathBuf, source: CassetteError },
}

impl ServiceConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    /// The file named by `CARBONDATE_CONFIG`, or defaults.
    pub fn from_env() -> Result<Self, ConfigError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => Self::from_file(Path::new(&path)),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.timeout_ms == 0 {
            return Err(ConfigError::ZeroTimeout);
        }
        if self.parallelism == 0 {
            return Err(ConfigError::ZeroParallelism);
        }
        if self.sources.is_empty() {
            return Err(ConfigError::NoSources);
        }
        Ok(())
    }

    /// Parses a comma-separated method list such as `archives,social`.
    pub fn parse_sources(list: &str) -> Result<Vec<Method>, UnknownMethod> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }

    pub fn build_transport(&self) -> Result<ServiceTransport, ConfigError> {
        let live = || LiveTransport::new(Duration::from_millis(self.timeout_ms));
        Ok(match &self.transport {
            TransportMode::Live => ServiceTransport::Live(live()),
            TransportMode::Replay(path) => ServiceTransport::Replay(load_cassette(path)?),
            TransportMode::Record(path) => {
                // Recording extends an existing cassette rather than clobbering it.
                let sink = if path.exists() {
                    load_cassette(path)?
                } else {
                    Cassette::new(self.now.unwrap_or_else(|| carbondate::Clock::now(&SystemClock)))
                };
                ServiceTransport::Record {
                    recorder: record_passthrough(live(), sink),
                    path: path.clone(),
                }
            }
        })
    }

    pub fn build_estimator(&self) -> Result<Estimator<Arc<ServiceTransport>>, ConfigError> {
        self.validate()?;
        let transport = Arc::new(self.build_transport()?);
        let estimator = Estimator::new(transport)
            .with_upstreams(self.upstreams.clone())
            .with_methods(self.sources.iter().copied())
            .with_parallelism(self.parallelism);
        Ok(match self.now {
            Some(now) => estimator.with_clock(FixedClock(now)),
            None => estimator,
        })
    }
}

fn load_cassette(path: &Path) -> Result<Cassette, ConfigError> {
    Cassette::load(path).map_err(|source| ConfigError::Cassette {
        path: path.to_owned(),
        source,
    })
}

/// The transport selected by [`TransportMode`].
pub enum ServiceTransport {
    Live(LiveTransport),
    Replay(Cassette),
    Record {
        recorder: RecordingTransport<LiveTransport>,
        path: PathBuf,
    },
}

impl ServiceTransport {
    /// Writes the recorded cassette back to disk; a no-op for other modes.
    pub fn persist(&self) -> Result<(), CassetteError> {
        match self {
            ServiceTransport::Record { recorder, path } => recorder.cassette().save(path),
            _ => Ok(()),
        }
    }
}

impl Transport for ServiceTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        match self {
            ServiceTransport::Live(t) => t.send(request),
            ServiceTransport::Replay(t) => t.send(request),
            ServiceTransport::Record { recorder, .. } => recorder.send(request),
        }
    }
}
