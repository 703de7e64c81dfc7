//! HTTP endpoint, batch runner and evaluation driver around [`carbondate`].

mod batch;
mod config;
mod evaluate;
mod server;

pub use batch::{run_batch, BatchStats};
pub use config::{ConfigError, ServiceConfig, ServiceTransport, TransportMode, CONFIG_ENV};
pub use evaluate::{run_evaluation, write_outputs};
pub use server::{router, serve, target_from_request_uri, AppState};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/service.md")]
mod service_chapter {}
