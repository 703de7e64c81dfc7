use serde::Deserialize;

use crate::model::{filter_plausible, CanonicalUri, UtcTimestamp};

use super::{fetch_json, ConfidenceFlag, Detail, EvidenceResult, Method, SourceContext};

/// Most posts the social search service returns for one URI.
pub const SOCIAL_POST_LIMIT: usize = 500;

#[derive(Debug, Deserialize)]
struct TrackbacksResponse {
    response: Trackbacks,
}

#[derive(Debug, Deserialize)]
struct Trackbacks {
    total: Option<u64>,
    #[serde(default)]
    list: Vec<Trackback>,
}

#[derive(Debug, Deserialize)]
struct Trackback {
    date: i64,
}

/// Earliest of the most recent posts that link to the resource. The upstream
/// already folds shortened variants of the URI into one result set.
pub fn query_social(uri: &CanonicalUri, ctx: &SourceContext<'_>) -> EvidenceResult {
    let method = Method::Social;
    let payload: TrackbacksResponse = match fetch_json(ctx, &ctx.upstreams.social_url(uri)) {
        Ok(v) => v,
        Err(e) => return EvidenceResult::error(method, e),
    };
    let posts = &payload.response.list[..payload.response.list.len().min(SOCIAL_POST_LIMIT)];
    let returned = posts.len();
    let mut discarded = false;
    let first = posts
        .iter()
        .filter_map(|p| {
            let t = filter_plausible(UtcTimestamp::from_unix(p.date), &ctx.window);
            discarded |= t.is_none();
            t
        })
        .min();
    let Some(first) = first else {
        let result = EvidenceResult::empty(method);
        return if discarded {
            result.with_flag(ConfidenceFlag::ImplausibleDiscarded)
        } else {
            result
        };
    };
    let mut result = EvidenceResult::found(method, first, &ctx.window).with_detail(Detail::Social {
        returned,
        total: payload.response.total,
    });
    if returned == SOCIAL_POST_LIMIT {
        result = result.with_flag(ConfidenceFlag::ClippedSocialWindow);
    }
    if discarded {
        result = result.with_flag(ConfidenceFlag::ImplausibleDiscarded);
    }
    result
}
