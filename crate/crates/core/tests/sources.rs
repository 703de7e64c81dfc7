use std::collections::BTreeSet;
use std::path::PathBuf;

use carbondate::replay::Interaction;
use carbondate::sources::{query_social, EvidenceSource, SourceContext};
use carbondate::{
    gather_evidence, normalize_uri, CanonicalUri, Cassette, EvidenceResult, HttpRequest, HttpResponse,
    Method, PlausibilityWindow, SourceRegistry, Status, Upstreams, UtcTimestamp,
};
use serde_json::json;

fn now() -> UtcTimestamp {
    UtcTimestamp::parse_iso("2013-03-01T04:44:47").unwrap()
}

fn window() -> PlausibilityWindow {
    PlausibilityWindow::until(now()).unwrap()
}

fn mementoweb() -> (CanonicalUri, Cassette) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mementoweb.jsonl");
    (normalize_uri("http://www.mementoweb.org").unwrap(), Cassette::load(path).unwrap())
}

fn all() -> BTreeSet<Method> {
    Method::ALL.into_iter().collect()
}

#[test]
fn fixture_yields_six_ok_results_in_name_order() {
    let (uri, cassette) = mementoweb();
    let up = Upstreams::default();
    let ctx = SourceContext::new(&cassette, window(), &up);
    let results = gather_evidence(&uri, &ctx, &SourceRegistry::default(), &all(), 3);
    let methods: Vec<Method> = results.iter().map(|r| r.method()).collect();
    assert_eq!(methods, Method::ALL.to_vec());
    assert!(results.iter().all(|r| r.is_ok()));
}

#[test]
fn a_missing_interaction_only_fails_its_own_source() {
    let (uri, full) = mementoweb();
    let up = Upstreams::default();
    let mut cassette = Cassette::new(full.recorded_at);
    let dropped = up.shortener_lookup_url(&uri);
    for i in full.entries().iter().filter(|i| i.request.url != dropped) {
        cassette.push(i.clone()).unwrap();
    }
    let ctx = SourceContext::new(&cassette, window(), &up);
    for parallelism in [1, 6] {
        let results = gather_evidence(&uri, &ctx, &SourceRegistry::default(), &all(), parallelism);
        assert_eq!(results.len(), 6);
        for r in &results {
            if r.method() == Method::Shortener {
                assert!(matches!(r.status(), Status::Error(_)), "{:?}", r.status());
                assert_eq!(r.estimate(), None);
            } else {
                assert!(r.is_ok(), "{}: {:?}", r.method(), r.status());
            }
        }
    }
}

struct Exploding;

impl EvidenceSource for Exploding {
    fn method(&self) -> Method {
        Method::Social
    }

    fn query(&self, _uri: &CanonicalUri, _ctx: &SourceContext<'_>) -> EvidenceResult {
        panic!("source bug")
    }
}

#[test]
fn a_panicking_source_is_contained() {
    let (uri, cassette) = mementoweb();
    let up = Upstreams::default();
    let ctx = SourceContext::new(&cassette, window(), &up);
    let mut registry = SourceRegistry::default();
    registry.register(Box::new(Exploding));
    let results = gather_evidence(&uri, &ctx, &registry, &all(), 6);
    assert_eq!(results.len(), 6);
    assert!(matches!(results.iter().find(|r| r.method() == Method::Social).unwrap().status(), Status::Error(_)));
    assert_eq!(results.iter().filter(|r| r.is_ok()).count(), 5);
}

fn head_only(uri: &CanonicalUri, response: HttpResponse) -> Cassette {
    let mut c = Cassette::new(now());
    c.push(Interaction::ok(HttpRequest::head(uri.request_url()), response)).unwrap();
    c
}

#[test]
fn last_modified_cases() {
    let uri = normalize_uri("http://example.com/page").unwrap();
    let up = Upstreams::default();
    let only = BTreeSet::from([Method::LastModified]);

    let bare = head_only(&uri, HttpResponse::new(200));
    let ctx = SourceContext::new(&bare, window(), &up);
    let results = gather_evidence(&uri, &ctx, &SourceRegistry::default(), &only, 1);
    assert_eq!(results.len(), 1);
    assert_eq!(results[0].status(), &Status::Empty);

    let future = now().plus_secs(10 * 365 * 86_400);
    let ahead = head_only(
        &uri,
        HttpResponse::new(200)
            .with_header("Date", &now().to_http_date())
            .with_header("Last-Modified", &future.to_http_date()),
    );
    let ctx = SourceContext::new(&ahead, window(), &up);
    let results = gather_evidence(&uri, &ctx, &SourceRegistry::default(), &only, 1);
    assert_eq!(results[0].status(), &Status::Empty);

    let fine = head_only(&uri, HttpResponse::new(200).with_header("last-modified", "Wed, 27 Feb 2013 17:27:20 GMT"));
    let ctx = SourceContext::new(&fine, window(), &up);
    let results = gather_evidence(&uri, &ctx, &SourceRegistry::default(), &only, 1);
    assert_eq!(results[0].estimate(), Some(UtcTimestamp::parse_iso("2013-02-27T17:27:20").unwrap()));
}

#[test]
fn social_estimate_is_the_earliest_plausible_post() {
    let uri = normalize_uri("http://example.com/").unwrap();
    let up = Upstreams::default();
    let dates: Vec<i64> = vec![1_300_000_000, 700_000_000, 1_257_800_000, 1_999_999_999, 1_280_000_000];
    let list: Vec<_> = dates.iter().map(|d| json!({"date": d})).collect();
    let mut c = Cassette::new(now());
    c.push_get(
        &up.social_url(&uri),
        200,
        "application/json",
        json!({"response": {"total": dates.len(), "list": list}}).to_string(),
    )
    .unwrap();
    let ctx = SourceContext::new(&c, window(), &up);
    let r = query_social(&uri, &ctx);
    let oracle = dates
        .iter()
        .map(|&d| UtcTimestamp::from_unix(d))
        .filter(|&t| window().contains(t))
        .min();
    assert_eq!(r.estimate(), oracle);
}

#[test]
fn backlinks_take_the_minimum_first_appearance() {
    let uri = normalize_uri("http://target.example.com/").unwrap();
    let up = Upstreams::default();
    let mut c = Cassette::new(now());
    let pages = [
        ("http://a.example.net/", "2010-05-01T00:00:00"),
        ("http://b.example.net/", "2009-03-02T00:00:00"),
        ("http://c.example.net/", "2012-01-01T00:00:00"),
    ];
    let listing: Vec<_> = pages.iter().map(|(p, _)| json!({"link": p})).collect();
    c.push_get(&up.backlinks_url(&uri), 200, "application/json", json!({"items": listing}).to_string())
        .unwrap();
    for (page, first) in pages {
        let first = UtcTimestamp::parse_iso(first).unwrap();
        let captures: Vec<UtcTimestamp> = (-4..6).map(|k| first.plus_secs(k * 40 * 86_400)).collect();
        let mut timemap = vec![format!("<{page}>; rel=\"original\"")];
        for t in &captures {
            let capture = format!("http://web.archive.org/web/{}/{page}", t.to_iso().replace(['-', 'T', ':'], ""));
            timemap.push(format!("<{capture}>; rel=\"memento\"; datetime=\"{}\"", t.to_http_date()));
            let body = if *t >= first {
                "<a href=\"http://target.example.com/\">t</a>"
            } else {
                "<p>none</p>"
            };
            c.push_get(&capture, 200, "text/html", body.into()).unwrap();
        }
        let page_uri = normalize_uri(page).unwrap();
        c.push_get(&up.timemap_url(&page_uri), 200, "application/link-format", timemap.join(",\n")).unwrap();
    }
    let ctx = SourceContext::new(&c, window(), &up);
    let r = carbondate::sources::query_backlinks(&uri, &ctx);
    assert_eq!(r.estimate(), Some(UtcTimestamp::parse_iso("2009-03-02T00:00:00").unwrap()));
    assert!(r.flags().is_empty());
}

#[test]
fn no_backlinks_is_empty() {
    let uri = normalize_uri("http://target.example.com/").unwrap();
    let up = Upstreams::default();
    let mut c = Cassette::new(now());
    c.push_get(&up.backlinks_url(&uri), 200, "application/json", "{\"items\": []}".into()).unwrap();
    let ctx = SourceContext::new(&c, window(), &up);
    assert_eq!(carbondate::sources::query_backlinks(&uri, &ctx).status(), &Status::Empty);
}
