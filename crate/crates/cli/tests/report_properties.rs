//! Report invariants over arbitrary traces.

use proptest::prelude::*;
use semcache::report::{ReplayReport, RouteLabel, TraceRecord};
use semcache_core::{Mode, Outcome, ReductionReport};

fn label() -> impl Strategy<Value = RouteLabel> {
    prop::sample::select(RouteLabel::ALL.to_vec())
}

fn mode() -> impl Strategy<Value = Option<Mode>> {
    prop::option::of(prop::sample::select(Mode::ALL.to_vec()))
}

fn record() -> impl Strategy<Value = TraceRecord> {
    (
        label(),
        prop::option::of(-0.2f64..=1.0),
        mode(),
        prop::option::of((1usize..60_000, 0usize..60_000)),
        any::<bool>(),
    )
        .prop_map(|(route, s_base, expected_mode, tokens, failed)| TraceRecord {
            index: 0,
            query: "q".into(),
            route,
            s_base: if route == RouteLabel::Guarded { None } else { s_base },
            s_adj: None,
            candidate: None,
            adaptations: 0,
            oracle_fallback: false,
            intent: None,
            outcome: if failed { Outcome::Failed } else { Outcome::Generated },
            retry_count: 0,
            executor_calls: 0,
            prompt_tokens: tokens.map(|(f, k)| ReductionReport::new(f, k.min(f))),
            expected_mode,
            expected_intent: None,
            response: String::new(),
        })
}

proptest! {
    #[test]
    fn counts_and_bins_sum_to_total(trace in prop::collection::vec(record(), 0..80)) {
        let r = ReplayReport::from_trace(&trace);
        prop_assert_eq!(r.total, trace.len());
        prop_assert_eq!(r.mode_counts.sum(), r.total);
        prop_assert_eq!(r.similarity_histogram.iter().map(|b| b.count).sum::<usize>(), r.total);
        let hits = r.mode_counts.return_ + r.mode_counts.guide;
        if r.total > 0 {
            prop_assert_eq!(r.utilization_pct, hits as f64 / r.total as f64);
        }
        let expected: usize = r.expectations.values().map(|e| e.expected).sum();
        let matched: usize = r.expectations.values().map(|e| e.matched).sum();
        prop_assert_eq!(expected - matched, r.mode_mismatches);
    }

    #[test]
    fn report_ignores_record_order(trace in prop::collection::vec(record(), 0..40), seed in any::<u64>()) {
        let mut shuffled = trace.clone();
        // Deterministic permutation driven by the seed.
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (seed.wrapping_mul(i as u64 + 1).rotate_left(17) % (i as u64 + 1)) as usize;
            shuffled.swap(i, j);
        }
        prop_assert_eq!(ReplayReport::from_trace(&trace), ReplayReport::from_trace(&shuffled));
    }

    #[test]
    fn trace_json_round_trip_recounts(trace in prop::collection::vec(record(), 0..40)) {
        let text: String = trace.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();
        let back: Vec<TraceRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        prop_assert_eq!(ReplayReport::from_trace(&back), ReplayReport::from_trace(&trace));
    }
}
