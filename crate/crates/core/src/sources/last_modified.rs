use crate::model::{parse_http_date, CanonicalUri};
use crate::transport::HttpRequest;

use super::{EvidenceResult, Method, SourceContext};

/// Headers-only request to the resource itself; votes with `Last-Modified`.
///
/// Servers often report a fresher date than the true creation date, so this
/// is one vote among six, never authoritative.
pub fn probe_last_modified(uri: &CanonicalUri, ctx: &SourceContext<'_>) -> EvidenceResult {
    let method = Method::LastModified;
    let response = match ctx.transport.send(&HttpRequest::head(uri.request_url())) {
        Ok(r) => r,
        Err(e) => return EvidenceResult::error(method, e.to_string()),
    };
    if response.status >= 400 {
        return EvidenceResult::empty(method);
    }
    match response.header("Last-Modified").map(parse_http_date) {
        Some(Ok(t)) => EvidenceResult::found(method, t, &ctx.window),
        _ => EvidenceResult::empty(method),
    }
}
