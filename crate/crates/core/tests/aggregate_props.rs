use carbondate::aggregate::ParsedReport;
use carbondate::{
    aggregate, normalize_uri, render_report, EvidenceResult, Method, PlausibilityWindow, ReportFormat, UtcTimestamp,
};
use proptest::prelude::*;

fn window() -> PlausibilityWindow {
    PlausibilityWindow::until(UtcTimestamp::parse_iso("2013-03-01T04:44:47").unwrap()).unwrap()
}

#[derive(Debug, Clone)]
enum Outcome {
    Found(i64),
    Empty,
    Failed,
}

fn outcome() -> impl Strategy<Value = Outcome> {
    prop_oneof![
        // Narrow range so that ties between methods are common.
        3 => (1_000_000_000i64..1_000_000_020).prop_map(Outcome::Found),
        2 => (-5_364_662_400i64..4_102_444_800).prop_map(Outcome::Found),
        1 => Just(Outcome::Empty),
        1 => Just(Outcome::Failed),
    ]
}

fn evidence_set() -> impl Strategy<Value = Vec<EvidenceResult>> {
    (prop::sample::subsequence(Method::ALL.to_vec(), 0..=6), prop::collection::vec(outcome(), 6)).prop_map(
        |(methods, outcomes)| {
            methods
                .into_iter()
                .zip(outcomes)
                .map(|(m, o)| match o {
                    Outcome::Found(t) => EvidenceResult::found(m, UtcTimestamp::from_unix(t), &window()),
                    Outcome::Empty => EvidenceResult::empty(m),
                    Outcome::Failed => EvidenceResult::error(m, "upstream failed"),
                })
                .collect()
        },
    )
}

/// Earliest ok estimate, ties resolved by the fixed method order, by scanning.
fn brute_force(evidence: &[EvidenceResult]) -> (Option<UtcTimestamp>, Option<Method>) {
    let mut best: Option<(UtcTimestamp, Method)> = None;
    for &m in Method::TIE_BREAK.iter() {
        for e in evidence.iter().filter(|e| e.method() == m) {
            if let Some(t) = e.estimate() {
                if best.is_none_or(|(b, _)| t < b) {
                    best = Some((t, m));
                }
            }
        }
    }
    (best.map(|b| b.0), best.map(|b| b.1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn aggregate_matches_brute_force(evidence in evidence_set()) {
        let uri = normalize_uri("http://example.com/").unwrap();
        let ce = aggregate(&uri, evidence.clone()).unwrap();
        let (t, m) = brute_force(&evidence);
        prop_assert_eq!(ce.estimated, t);
        prop_assert_eq!(ce.winning_method, m);
        prop_assert_eq!(ce.estimated.is_some(), evidence.iter().any(|e| e.is_ok()));
        for e in &ce.evidence {
            if let Some(t) = e.estimate() {
                prop_assert!(window().contains(t));
            }
        }
    }

    #[test]
    fn aggregate_ignores_evidence_order(evidence in evidence_set(), seed in any::<u64>()) {
        let uri = normalize_uri("http://example.com/").unwrap();
        let mut shuffled = evidence.clone();
        let len = shuffled.len();
        if len > 1 {
            for i in 0..len {
                shuffled.swap(i, (seed.wrapping_mul(i as u64 + 7) % len as u64) as usize);
            }
        }
        let a = aggregate(&uri, evidence).unwrap();
        let b = aggregate(&uri, shuffled).unwrap();
        prop_assert_eq!(a.estimated, b.estimated);
        prop_assert_eq!(a.winning_method, b.winning_method);
    }

    #[test]
    fn more_evidence_never_raises_the_estimate(evidence in evidence_set()) {
        let uri = normalize_uri("http://example.com/").unwrap();
        let full = aggregate(&uri, evidence.clone()).unwrap();
        for skip in 0..evidence.len() {
            let mut fewer = evidence.clone();
            fewer.remove(skip);
            let partial = aggregate(&uri, fewer).unwrap();
            if let Some(p) = partial.estimated {
                prop_assert!(full.estimated.unwrap() <= p);
            }
        }
    }

    #[test]
    fn rendered_reports_parse_back(evidence in evidence_set()) {
        let uri = normalize_uri("http://example.com/a?b=c").unwrap();
        let ce = aggregate(&uri, evidence).unwrap();
        for format in [ReportFormat::Legacy, ReportFormat::Generic] {
            let parsed = ParsedReport::from_value(&render_report(&ce, format), format).unwrap();
            prop_assert_eq!(parsed.estimated, ce.estimated);
            for m in Method::ALL {
                let expected = ce.evidence_for(m).and_then(|e| e.estimate());
                prop_assert_eq!(parsed.methods[&m], expected);
            }
        }
    }
}
