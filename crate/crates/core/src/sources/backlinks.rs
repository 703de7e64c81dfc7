use serde::Deserialize;

use crate::memento::{first_linking_memento, parse_timemap};
use crate::model::{filter_plausible, normalize_uri, CanonicalUri};
use crate::transport::{HttpRequest, TransportError};

use super::{fetch_json, BacklinkTrace, ConfidenceFlag, Detail, EvidenceResult, Method, SourceContext};

#[derive(Debug, Deserialize)]
struct BacklinkResponse {
    #[serde(default)]
    items: Vec<BacklinkItem>,
}

#[derive(Debug, Deserialize)]
struct BacklinkItem {
    link: String,
}

/// For every page the search engine lists as linking here, find the first
/// archived capture of that page carrying the link; vote with the minimum.
pub fn query_backlinks(uri: &CanonicalUri, ctx: &SourceContext<'_>) -> EvidenceResult {
    let method = Method::Backlinks;
    let listing: BacklinkResponse = match fetch_json(ctx, &ctx.upstreams.backlinks_url(uri)) {
        Ok(v) => v,
        Err(e) => return EvidenceResult::error(method, format!("backlink listing failed: {e}")),
    };

    let mut pages: Vec<CanonicalUri> = listing
        .items
        .iter()
        .filter_map(|item| normalize_uri(&item.link).ok())
        .filter(|page| page != uri)
        .collect();
    pages.sort();
    pages.dedup();

    let mut partial = false;
    let mut traces = Vec::with_capacity(pages.len());
    for page in pages {
        let tm_url = ctx.upstreams.timemap_url(&page);
        let timemap = match ctx.get(&tm_url) {
            Ok(r) if r.is_success() => parse_timemap(&r.body, &page).ok(),
            Ok(r) if r.status == 404 => None,
            _ => {
                partial = true;
                None
            }
        };
        let Some(timemap) = timemap else {
            traces.push(BacklinkTrace {
                uri: page,
                captures: 0,
                fetches: 0,
                first_linked: None,
            });
            continue;
        };
        let search = first_linking_memento(&timemap, uri, |m| {
            let response = ctx.transport.send(&HttpRequest::get(&m.capture_uri))?;
            if response.is_success() {
                Ok(response.body)
            } else {
                Err(TransportError::Failed {
                    url: m.capture_uri.clone(),
                    message: format!("status {}", response.status),
                })
            }
        });
        partial |= search.degraded();
        traces.push(BacklinkTrace {
            uri: page,
            captures: timemap.len(),
            fetches: search.fetches,
            first_linked: search.first_linked.and_then(|t| filter_plausible(t, &ctx.window)),
        });
    }

    let first = traces.iter().filter_map(|t| t.first_linked).min();
    let result = match first {
        Some(t) => EvidenceResult::found(method, t, &ctx.window),
        None => EvidenceResult::empty(method),
    };
    let result = if traces.is_empty() {
        result
    } else {
        result.with_detail(Detail::Backlinks { backlinks: traces })
    };
    if partial {
        result.with_flag(ConfidenceFlag::PartialFetch)
    } else {
        result
    }
}
