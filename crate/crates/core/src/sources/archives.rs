use std::collections::BTreeMap;

use crate::memento::{earliest_memento, parse_timemap, Memento, Timemap};
use crate::model::CanonicalUri;

use super::{ArchiveEarliest, Detail, EvidenceResult, Method, SourceContext};

/// Earliest capture across all public archives, via the aggregate timemap.
pub fn query_archives(uri: &CanonicalUri, ctx: &SourceContext<'_>) -> EvidenceResult {
    let method = Method::Archives;
    let url = ctx.upstreams.timemap_url(uri);
    let response = match ctx.get(&url) {
        Ok(r) => r,
        Err(e) => return EvidenceResult::error(method, e.to_string()),
    };
    // Aggregators answer 404 when no archive holds the resource.
    if response.status == 404 {
        return EvidenceResult::empty(method);
    }
    if !response.is_success() {
        return EvidenceResult::error(method, format!("{url} returned status {}", response.status));
    }
    let timemap = match parse_timemap(&response.body, uri) {
        Ok(tm) => tm,
        Err(e) => return EvidenceResult::error(method, format!("{url}: {e}")),
    };

    let mut per_archive: BTreeMap<&str, Vec<Memento>> = BTreeMap::new();
    for m in timemap.mementos() {
        per_archive.entry(&m.archive_host).or_default().push(m.clone());
    }
    let mut by_archive: Vec<ArchiveEarliest> = per_archive
        .into_iter()
        .filter_map(|(host, mementos)| {
            let sub = Timemap::new(uri.clone(), mementos);
            earliest_memento(&sub, &ctx.window).map(|e| ArchiveEarliest {
                archive: host.to_string(),
                earliest: e.candidate,
            })
        })
        .collect();
    by_archive.sort_by(|a, b| (a.earliest, &a.archive).cmp(&(b.earliest, &b.archive)));

    match by_archive.first() {
        Some(first) => EvidenceResult::found(method, first.earliest, &ctx.window)
            .with_detail(Detail::Archives { by_archive }),
        None => EvidenceResult::empty(method),
    }
}
