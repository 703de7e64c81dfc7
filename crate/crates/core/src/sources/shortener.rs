use serde::Deserialize;

use crate::model::{CanonicalUri, UtcTimestamp};

use super::{fetch_json, Detail, EvidenceResult, Method, SourceContext};

#[derive(Debug, Deserialize)]
struct LookupResponse {
    data: LookupData,
}

#[derive(Debug, Deserialize)]
struct LookupData {
    #[serde(default)]
    link_lookup: Vec<LookupEntry>,
}

#[derive(Debug, Deserialize)]
struct LookupEntry {
    aggregate_link: Option<String>,
}

#[derive(Debug, Deserialize)]
struct InfoResponse {
    data: InfoData,
}

#[derive(Debug, Deserialize)]
struct InfoData {
    #[serde(default)]
    info: Vec<InfoEntry>,
}

#[derive(Debug, Deserialize)]
struct InfoEntry {
    created_at: Option<i64>,
}

/// Two-step shortener protocol: resolve the long URI to its aggregate
/// (first, public) short link, then ask when that short link was created.
pub fn query_shortener(uri: &CanonicalUri, ctx: &SourceContext<'_>) -> EvidenceResult {
    let method = Method::Shortener;
    let lookup: LookupResponse = match fetch_json(ctx, &ctx.upstreams.shortener_lookup_url(uri)) {
        Ok(v) => v,
        Err(e) => return EvidenceResult::error(method, format!("lookup failed: {e}")),
    };
    let Some(short_url) = lookup
        .data
        .link_lookup
        .into_iter()
        .find_map(|entry| entry.aggregate_link)
    else {
        return EvidenceResult::empty(method);
    };

    let info: InfoResponse = match fetch_json(ctx, &ctx.upstreams.shortener_info_url(&short_url)) {
        Ok(v) => v,
        Err(e) => return EvidenceResult::error(method, format!("info query failed: {e}")),
    };
    let Some(created) = info.data.info.iter().find_map(|i| i.created_at) else {
        return EvidenceResult::error(method, format!("info query failed: no created_at for {short_url}"));
    };
    EvidenceResult::found(method, UtcTimestamp::from_unix(created), &ctx.window)
        .with_detail(Detail::Shortener { short_url })
}
