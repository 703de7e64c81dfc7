use std::sync::Arc;

use axum::extract::State;
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use carbondate::{normalize_uri, render_report_string, Estimator, ReportFormat, Transport};
use percent_encoding::percent_decode_str;
use serde_json::json;

const ESTIMATE_PREFIX: &str = "/cd/";

/// Shared, read-only request state.
pub struct AppState<T> {
    pub estimator: Estimator<T>,
    pub format: ReportFormat,
}

/// `GET /cd/{uri}` and `GET /healthz`.
pub fn router<T: Transport + 'static>(state: Arc<AppState<T>>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok\n" }))
        .route("/cd/{*raw}", get(handle_estimate::<T>))
        .route("/cd/", get(handle_estimate::<T>))
        .with_state(state)
}

/// The target URI is everything after `/cd/`, query included, percent-decoded once.
pub fn target_from_request_uri(uri: &Uri) -> String {
    let raw = uri.path_and_query().map_or(uri.path(), |pq| pq.as_str());
    let suffix = raw.strip_prefix(ESTIMATE_PREFIX).unwrap_or_default();
    percent_decode_str(suffix).decode_utf8_lossy().into_owned()
}

async fn handle_estimate<T: Transport + 'static>(State(state): State<Arc<AppState<T>>>, uri: Uri) -> Response {
    let raw = target_from_request_uri(&uri);
    let target = match normalize_uri(&raw) {
        Ok(t) => t,
        Err(e) => {
            let body = json!({"error": e.to_string(), "input": raw}).to_string() + "\n";
            return (StatusCode::BAD_REQUEST, [(header::CONTENT_TYPE, "application/json")], body).into_response();
        }
    };
    let worker = Arc::clone(&state);
    let rendered = tokio::task::spawn_blocking(move || {
        let ce = worker.estimator.estimate(&target);
        render_report_string(&ce, worker.format)
    })
    .await;
    match rendered {
        Ok(body) => ([(header::CONTENT_TYPE, "application/json")], body).into_response(),
        Err(e) => {
            let body = json!({"error": format!("estimation aborted: {e}")}).to_string() + "\n";
            (StatusCode::INTERNAL_SERVER_ERROR, [(header::CONTENT_TYPE, "application/json")], body).into_response()
        }
    }
}

/// Binds `listen` and serves until the process is stopped.
pub async fn serve<T: Transport + 'static>(listen: &str, state: Arc<AppState<T>>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    axum::serve(listener, router(state)).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_keeps_scheme_and_query() {
        let uri: Uri = "/cd/http://www.mementoweb.org".parse().unwrap();
        assert_eq!(target_from_request_uri(&uri), "http://www.mementoweb.org");
        let uri: Uri = "/cd/http://example.com/a?b=c&d=e".parse().unwrap();
        assert_eq!(target_from_request_uri(&uri), "http://example.com/a?b=c&d=e");
        let uri: Uri = "/cd/not%20a%20uri".parse().unwrap();
        assert_eq!(target_from_request_uri(&uri), "not a uri");
    }

    #[test]
    fn decoding_happens_once() {
        let uri: Uri = "/cd/http://example.com/%2541".parse().unwrap();
        assert_eq!(target_from_request_uri(&uri), "http://example.com/%41");
    }
}
