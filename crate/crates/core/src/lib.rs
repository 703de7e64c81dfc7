//! Estimates when a web resource was created by collecting independent
//! traces of it (archive captures, response headers, short links, social
//! posts, search-index crawls and backlinks) and taking the earliest
//! plausible one.
//!
//! ```no_run
//! use carbondate::{Estimator, LiveTransport, render_report_string, ReportFormat};
//! use std::time::Duration;
//!
//! let estimator = Estimator::new(LiveTransport::new(Duration::from_secs(10)));
//! let estimate = estimator.estimate_raw("http://www.mementoweb.org/").unwrap();
//! print!("{}", render_report_string(&estimate, ReportFormat::Legacy));
//! ```
//!
//! Everything that touches the network goes through [`Transport`], so the
//! same code runs against live services, a recorded [`Cassette`] or a
//! [`SyntheticWorld`] with known ground truth.

pub mod aggregate;
pub mod estimator;
pub mod eval;
pub mod memento;
pub mod model;
mod par;
pub mod replay;
pub mod sources;
pub mod transport;

pub use aggregate::{aggregate, render_report, render_report_string, CreationEstimate, ReportFormat};
pub use estimator::Estimator;
pub use memento::{earliest_memento, first_linking_memento, parse_timemap, Memento, Timemap};
pub use model::{
    normalize_uri, CanonicalUri, Clock, DayDate, FixedClock, ModelError, PlausibilityWindow, SystemClock,
    UtcTimestamp,
};
pub use par::map_ordered;
pub use replay::{generate_world, Cassette, LagModel, RecordingTransport, SyntheticWorld};
pub use sources::{gather_evidence, EvidenceResult, Method, SourceRegistry, Status, Upstreams};
pub use transport::{HttpRequest, HttpResponse, LiveTransport, Transport, TransportError};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/time-and-uris.md")]
    mod time_and_uris {}
    #[doc = include_str!("../../../book/src/timemaps.md")]
    mod timemaps {}
    #[doc = include_str!("../../../book/src/evidence.md")]
    mod evidence {}
    #[doc = include_str!("../../../book/src/aggregation.md")]
    mod aggregation {}
    #[doc = include_str!("../../../book/src/replay.md")]
    mod replay {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
}
