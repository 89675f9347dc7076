//! Per-record traces and the aggregate replay report.
//!
//! The report is a pure function of the trace: every field is a sum or a
//! count over records, so it does not depend on the order workers finished
//! in, and `semcache report` can recompute it from `trace.jsonl` alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use semcache_core::{Mode, Outcome, PipelineState, ReductionReport};
use serde::{Deserialize, Serialize};

/// Where a record was routed. Guarded queries never reach the matcher and
/// get their own label so that the four counts sum to the total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteLabel {
    Return,
    Guide,
    Generate,
    Guarded,
}

impl RouteLabel {
    pub const ALL: [RouteLabel; 4] = [RouteLabel::Return, RouteLabel::Guide, RouteLabel::Generate, RouteLabel::Guarded];

    pub fn as_str(self) -> &'static str {
        match self {
            RouteLabel::Return => "return",
            RouteLabel::Guide => "guide",
            RouteLabel::Generate => "generate",
            RouteLabel::Guarded => "guarded",
        }
    }

    /// A run that failed before routing had no cache decision, so it counts
    /// as fresh generation.
    pub fn of(state: &PipelineState) -> Self {
        match (state.mode(), state.outcome) {
            (Some(Mode::Return), _) => RouteLabel::Return,
            (Some(Mode::Guide), _) => RouteLabel::Guide,
            (Some(Mode::Generate), _) => RouteLabel::Generate,
            (None, Some(Outcome::Guarded)) => RouteLabel::Guarded,
            (None, _) => RouteLabel::Generate,
        }
    }

    pub fn matches(self, mode: Mode) -> bool {
        self.as_str() == mode.as_str()
    }
}

/// One line of `trace.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Zero-based position in the log.
    pub index: usize,
    pub query: String,
    pub route: RouteLabel,
    pub s_base: Option<f64>,
    pub s_adj: Option<f64>,
    pub candidate: Option<String>,
    #[serde(default)]
    pub adaptations: usize,
    #[serde(default)]
    pub oracle_fallback: bool,
    pub intent: Option<String>,
    pub outcome: Outcome,
    pub retry_count: u8,
    pub executor_calls: u8,
    pub prompt_tokens: Option<ReductionReport>,
    pub expected_mode: Option<Mode>,
    pub expected_intent: Option<String>,
    pub response: String,
}

impl TraceRecord {
    pub fn mode_mismatch(&self) -> bool {
        self.expected_mode.is_some_and(|m| !self.route.matches(m))
    }

    pub fn intent_mismatch(&self) -> bool {
        self.expected_intent
            .as_deref()
            .is_some_and(|e| self.intent.as_deref() != Some(e))
    }
}

/// Similarity histogram bin edges; the last bin is closed on the right.
pub const HISTOGRAM_EDGES: [f64; 7] = [0.0, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0];

/// Bin index of a base similarity. Negative scores fall in the first bin.
pub fn histogram_bin(s: f64) -> usize {
    let last = HISTOGRAM_EDGES.len() - 2;
    (1..=last).rev().find(|&i| s >= HISTOGRAM_EDGES[i]).unwrap_or(0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCounts {
    #[serde(rename = "return")]
    pub return_: usize,
    pub guide: usize,
    pub generate: usize,
    pub guarded: usize,
}

impl ModeCounts {
    pub fn get(&self, label: RouteLabel) -> usize {
        match label {
            RouteLabel::Return => self.return_,
            RouteLabel::Guide => self.guide,
            RouteLabel::Generate => self.generate,
            RouteLabel::Guarded => self.guarded,
        }
    }

    fn bump(&mut self, label: RouteLabel) {
        match label {
            RouteLabel::Return => self.return_ += 1,
            RouteLabel::Guide => self.guide += 1,
            RouteLabel::Generate => self.generate += 1,
            RouteLabel::Guarded => self.guarded += 1,
        }
    }

    pub fn sum(&self) -> usize {
        self.return_ + self.guide + self.generate + self.guarded
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    /// Records that declared this mode.
    pub expected: usize,
    /// Of those, records actually routed there.
    pub matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub total: usize,
    pub mode_counts: ModeCounts,
    /// (Return + Guide) / total, as a fraction.
    pub utilization_pct: f64,
    /// Over each record's best base similarity; guarded records count as 0.
    pub similarity_histogram: Vec<HistogramBin>,
    /// Summed over every record that assembled prompts.
    pub token_reduction: ReductionReport,
    pub failures: usize,
    /// Keyed by expected mode.
    pub expectations: BTreeMap<String, Expectation>,
    pub mode_mismatches: usize,
    pub intent_mismatches: usize,
}

impl ReplayReport {
    pub fn from_trace(trace: &[TraceRecord]) -> Self {
        let mut modes = ModeCounts::default();
        let mut bins = [0usize; HISTOGRAM_EDGES.len() - 1];
        let mut tokens = ReductionReport::new(0, 0);
        let mut expectations: BTreeMap<String, Expectation> = Mode::ALL
            .iter()
            .map(|m| (m.as_str().to_string(), Expectation::default()))
            .collect();
        let (mut failures, mut mode_mismatches, mut intent_mismatches) = (0, 0, 0);
        for r in trace {
            modes.bump(r.route);
            bins[histogram_bin(r.s_base.unwrap_or(0.0))] += 1;
            if let Some(t) = &r.prompt_tokens {
                tokens = tokens.combine(t);
            }
            if r.outcome == Outcome::Failed {
                failures += 1;
            }
            if let Some(m) = r.expected_mode {
                let e = expectations.get_mut(m.as_str()).expect("all modes present");
                e.expected += 1;
                if r.route.matches(m) {
                    e.matched += 1;
                }
            }
            mode_mismatches += usize::from(r.mode_mismatch());
            intent_mismatches += usize::from(r.intent_mismatch());
        }
        let total = trace.len();
        let utilization_pct = if total == 0 {
            0.0
        } else {
            (modes.return_ + modes.guide) as f64 / total as f64
        };
        Self {
            total,
            mode_counts: modes,
            utilization_pct,
            similarity_histogram: bins
                .iter()
                .enumerate()
                .map(|(i, &count)| HistogramBin {
                    lo: HISTOGRAM_EDGES[i],
                    hi: HISTOGRAM_EDGES[i + 1],
                    count,
                })
                .collect(),
            token_reduction: tokens,
            failures,
            expectations,
            mode_mismatches,
            intent_mismatches,
        }
    }

    pub fn share(&self, label: RouteLabel) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.mode_counts.get(label) as f64 / self.total as f64
        }
    }

    pub fn has_mismatches(&self) -> bool {
        self.mode_mismatches > 0
    }

    /// Aligned plain-text rendering.
    pub fn render_text(&self) -> String {
        let pct = |x: f64| format!("{:.1}%", x * 100.0);
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "{:<24}{:>10}", "records", self.total);
        let _ = writeln!(w);
        let _ = writeln!(w, "{:<24}{:>10}{:>10}", "mode", "count", "share");
        for label in RouteLabel::ALL {
            let _ = writeln!(w, "{:<24}{:>10}{:>10}", label.as_str(), self.mode_counts.get(label), pct(self.share(label)));
        }
        let _ = writeln!(w, "{:<24}{:>10}{:>10}", "utilization", "", pct(self.utilization_pct));
        let _ = writeln!(w);
        let _ = writeln!(w, "{:<24}{:>10}", "similarity", "count");
        for (i, b) in self.similarity_histogram.iter().enumerate() {
            let close = if i + 1 == self.similarity_histogram.len() { ']' } else { ')' };
            let label = format!("[{:.2}, {:.2}{close}", b.lo, b.hi);
            let _ = writeln!(w, "{label:<24}{:>10}", b.count);
        }
        let _ = writeln!(w);
        let t = &self.token_reduction;
        let _ = writeln!(w, "{:<24}{:>10}", "prompt tokens full", t.full_tokens);
        let _ = writeln!(w, "{:<24}{:>10}", "prompt tokens filtered", t.filtered_tokens);
        let _ = writeln!(w, "{:<24}{:>10}", "token reduction", pct(t.reduction_pct));
        let _ = writeln!(w);
        let _ = writeln!(w, "{:<24}{:>10}", "failures", self.failures);
        let _ = writeln!(w);
        let _ = writeln!(w, "{:<24}{:>10}{:>10}", "expected mode", "expected", "matched");
        for (mode, e) in &self.expectations {
            let _ = writeln!(w, "{mode:<24}{:>10}{:>10}", e.expected, e.matched);
        }
        let _ = writeln!(w, "{:<24}{:>10}", "mode mismatches", self.mode_mismatches);
        let _ = writeln!(w, "{:<24}{:>10}", "intent mismatches", self.intent_mismatches);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_cover_edges() {
        assert_eq!(histogram_bin(-0.2), 0);
        assert_eq!(histogram_bin(0.0), 0);
        assert_eq!(histogram_bin(0.2999), 0);
        assert_eq!(histogram_bin(0.3), 1);
        assert_eq!(histogram_bin(0.5), 2);
        assert_eq!(histogram_bin(0.9), 4);
        assert_eq!(histogram_bin(0.99), 5);
        assert_eq!(histogram_bin(1.0), 5);
        assert_eq!(histogram_bin(1.0000001), 5);
    }

    #[test]
    fn empty_trace() {
        let r = ReplayReport::from_trace(&[]);
        assert_eq!(r.total, 0);
        assert_eq!(r.failures, 0);
        assert_eq!(r.utilization_pct, 0.0);
        assert_eq!(r.similarity_histogram.iter().map(|b| b.count).sum::<usize>(), 0);
    }
}
