use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::MatchError;
use crate::cache_store::CacheEntry;
use crate::signature::QuerySignature;

/// One field-level difference between a cached reference and the current query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptationHint {
    pub field: String,
    #[serde(alias = "reference")]
    pub reference_value: String,
    #[serde(alias = "current")]
    pub current_value: String,
}

/// Verdict of an equivalence check over the top-k candidates.
///
/// Serializes with the keys `matched`, `matched_index`, `adaptations` and an
/// optional `confidence`. `is_equivalent` is accepted as an alias of
/// `matched` on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    #[serde(alias = "is_equivalent")]
    pub matched: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_index: Option<usize>,
    #[serde(default)]
    pub adaptations: Vec<AdaptationHint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl EquivalenceVerdict {
    pub fn no_match() -> Self {
        Self {
            matched: false,
            matched_index: None,
            adaptations: Vec::new(),
            confidence: None,
        }
    }

    /// Check the structural invariants against a candidate count.
    pub fn validate(&self, candidates: usize) -> Result<(), MatchError> {
        let bad = |why: &'static str| Err(MatchError::InvalidVerdict(why));
        if let Some(i) = self.matched_index {
            if i >= candidates {
                return bad("matched_index out of range");
            }
        }
        if self.matched && (!self.adaptations.is_empty() || self.matched_index.is_none()) {
            return bad("matched verdict must name a candidate and carry no adaptations");
        }
        if !self.adaptations.is_empty() && self.matched_index.is_none() {
            return bad("adaptations require matched_index");
        }
        if self
            .adaptations
            .iter()
            .any(|h| h.field.is_empty() || h.reference_value == h.current_value)
        {
            return bad("adaptation hint with empty field or unchanged value");
        }
        if let Some(c) = self.confidence {
            if !(0.0..=1.0).contains(&c) {
                return bad("confidence outside [0, 1]");
            }
        }
        Ok(())
    }
}

/// The question being matched.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceQuery<'a> {
    pub text: &'a str,
    pub signature: &'a QuerySignature,
}

/// Pluggable semantic-equivalence judge (an LLM adapter in production).
pub trait EquivalenceOracle {
    fn check(&self, query: EquivalenceQuery<'_>, candidates: &[&CacheEntry]) -> Result<EquivalenceVerdict, MatchError>;
}

/// Run the oracle over candidates ordered by descending adjusted similarity.
///
/// An empty candidate list is an error. Oracle failures and verdicts that
/// violate the invariants degrade to [`EquivalenceVerdict::no_match`]; the
/// second element reports whether that fallback was taken.
pub fn check_equivalence(
    oracle: &dyn EquivalenceOracle,
    query: EquivalenceQuery<'_>,
    candidates: &[&CacheEntry],
) -> Result<(EquivalenceVerdict, bool), MatchError> {
    if candidates.is_empty() {
        return Err(MatchError::NoCandidates);
    }
    match oracle.check(query, candidates) {
        Ok(v) if v.validate(candidates.len()).is_ok() => Ok((v, false)),
        _ => Ok((EquivalenceVerdict::no_match(), true)),
    }
}
