use serde::Deserialize;

use crate::model::{normalize_uri, CanonicalUri, DayDate};

use super::{fetch_json, Detail, EvidenceResult, Method, SourceContext};

#[derive(Debug, Deserialize)]
struct SearchResponse {
    #[serde(default)]
    items: Vec<SearchItem>,
}

#[derive(Debug, Deserialize)]
struct SearchItem {
    link: String,
    crawl_date: Option<String>,
}

/// Crawl date the search index reports for the resource. Day granularity
/// only; the estimate is that day's midnight UTC.
pub fn query_search_index(uri: &CanonicalUri, ctx: &SourceContext<'_>) -> EvidenceResult {
    let method = Method::SearchIndex;
    let payload: SearchResponse = match fetch_json(ctx, &ctx.upstreams.search_index_url(uri)) {
        Ok(v) => v,
        Err(e) => return EvidenceResult::error(method, e),
    };
    let day = payload
        .items
        .iter()
        .filter(|item| normalize_uri(&item.link).is_ok_and(|u| &u == uri))
        .find_map(|item| item.crawl_date.as_deref().and_then(|d| DayDate::parse(d).ok()));
    match day {
        Some(day) => {
            let result = EvidenceResult::found(method, day.midnight(), &ctx.window);
            if result.is_ok() {
                result.with_detail(Detail::SearchIndex { day })
            } else {
                result
            }
        }
        None => EvidenceResult::empty(method),
    }
}
