//! Ties transport, sources and aggregation into one call per URI.

use std::collections::BTreeSet;

use crate::aggregate::{aggregate, CreationEstimate};
use crate::par::map_ordered;
use crate::model::{normalize_uri, CanonicalUri, Clock, ModelError, PlausibilityWindow, SystemClock};
use crate::sources::{gather_evidence, Method, SourceContext, SourceRegistry, Upstreams};
use crate::transport::Transport;

/// A configured estimator. Cheap to share across threads.
pub struct Estimator<T> {
    transport: T,
    registry: SourceRegistry,
    upstreams: Upstreams,
    clock: Box<dyn Clock>,
    enabled: BTreeSet<Method>,
    parallelism: usize,
}

impl<T: Transport> Estimator<T> {
    /// All six methods, the built-in sources and the system clock.
    pub fn new(transport: T) -> Self {
        Estimator {
            transport,
            registry: SourceRegistry::default(),
            upstreams: Upstreams::default(),
            clock: Box::new(SystemClock),
            enabled: Method::ALL.into_iter().collect(),
            parallelism: Method::ALL.len(),
        }
    }

    pub fn with_clock(mut self, clock: impl Clock + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn with_upstreams(mut self, upstreams: Upstreams) -> Self {
        self.upstreams = upstreams;
        self
    }

    pub fn with_registry(mut self, registry: SourceRegistry) -> Self {
        self.registry = registry;
        self
    }

    /// Methods to query. An empty set yields estimates with no evidence.
    pub fn with_methods(mut self, enabled: impl IntoIterator<Item = Method>) -> Self {
        self.enabled = enabled.into_iter().collect();
        self
    }

    /// Upper bound on concurrently running sources per URI; at least 1.
    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn enabled(&self) -> &BTreeSet<Method> {
        &self.enabled
    }

    pub fn window(&self) -> PlausibilityWindow {
        PlausibilityWindow::until(self.clock.now()).expect("clock reads after 1995")
    }

    pub fn estimate(&self, uri: &CanonicalUri) -> CreationEstimate {
        let ctx = SourceContext::new(&self.transport, self.window(), &self.upstreams);
        let evidence = gather_evidence(uri, &ctx, &self.registry, &self.enabled, self.parallelism);
        aggregate(uri, evidence).expect("registry yields one result per method")
    }

    /// Normalizes `raw` first.
    pub fn estimate_raw(&self, raw: &str) -> Result<CreationEstimate, ModelError> {
        Ok(self.estimate(&normalize_uri(raw)?))
    }

    /// Estimates every URI on `workers` threads. Output order matches input.
    pub fn estimate_all(&self, uris: &[CanonicalUri], workers: usize) -> Vec<CreationEstimate> {
        map_ordered(uris, workers, |uri| self.estimate(uri))
    }
}
