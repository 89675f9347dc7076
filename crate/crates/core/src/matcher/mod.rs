//! Reference matching: embedding similarity, domain boosts, the
//! dual-threshold decision and Guide-mode equivalence checking.
//!
//! Routing reads two scores per candidate. `s_base` is the raw cosine
//! similarity between query and cached question embeddings; `s_adj` adds the
//! domain boosts and is capped at [`ADJUSTED_CAP`]. Return is decided on
//! `s_base` alone: the cap sits below the default return threshold, so boosts
//! can never turn a near miss into a direct cache return.

mod boost;
mod embedding;
mod equivalence;
mod guidance;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use boost::{compute_boost, BoostBreakdown, BoostIncrements};
pub use embedding::{cosine_similarity, EmbeddingVector};
pub use equivalence::{
    check_equivalence, AdaptationHint, EquivalenceOracle, EquivalenceQuery, EquivalenceVerdict,
};
pub use guidance::{format_guidance, parse_guidance, placeholder_step, ParsedGuidance, GUIDANCE_HEADER};

use crate::cache_store::{CacheAccess, CacheEntry, CacheError};
use crate::lexicon::DomainLexicon;
use crate::signature::{structural_similarity, QuerySignature, SimilarityWeights};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatchError {
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("embedding has no components")]
    EmptyEmbedding,
    #[error("embedding contains a non-finite component")]
    NonFinite,
    #[error("invalid thresholds: need 0 < guide ({guide}) < return ({ret}) <= 1")]
    InvalidThresholds { ret: f64, guide: f64 },
    #[error("equivalence check needs at least one candidate")]
    NoCandidates,
    #[error("invalid equivalence verdict: {0}")]
    InvalidVerdict(&'static str),
    #[error("equivalence oracle failed: {0}")]
    Oracle(String),
    #[error("malformed guidance at line {line}: {reason}")]
    MalformedGuidance { line: usize, reason: String },
    #[error(transparent)]
    Cache(#[from] CacheError),
}

/// Upper bound of the adjusted similarity.
pub const ADJUSTED_CAP: f64 = 0.99;

/// `min(0.99, s_base + boost)`.
pub fn adjusted_similarity(s_base: f64, boost: &BoostBreakdown) -> f64 {
    (s_base + boost.total()).min(ADJUSTED_CAP)
}

/// Routing mode for a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Return,
    Guide,
    Generate,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Return, Mode::Guide, Mode::Generate];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Return => "return",
            Mode::Guide => "guide",
            Mode::Generate => "generate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawThresholds")]
pub struct Thresholds {
    pub theta_return: f64,
    pub theta_guide: f64,
}

#[derive(Deserialize)]
struct RawThresholds {
    theta_return: f64,
    theta_guide: f64,
}

impl TryFrom<RawThresholds> for Thresholds {
    type Error = MatchError;
    fn try_from(r: RawThresholds) -> Result<Self, Self::Error> {
        Thresholds::new(r.theta_return, r.theta_guide)
    }
}

impl Thresholds {
    pub const DEFAULT_RETURN: f64 = 0.995;
    pub const DEFAULT_GUIDE: f64 = 0.50;

    pub fn new(theta_return: f64, theta_guide: f64) -> Result<Self, MatchError> {
        if !(theta_guide > 0.0 && theta_guide < theta_return && theta_return <= 1.0) {
            return Err(MatchError::InvalidThresholds {
                ret: theta_return,
                guide: theta_guide,
            });
        }
        Ok(Self {
            theta_return,
            theta_guide,
        })
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            theta_return: Self::DEFAULT_RETURN,
            theta_guide: Self::DEFAULT_GUIDE,
        }
    }
}

/// Return iff `s_base ≥ θ_R`; otherwise Guide iff `s_adj ≥ θ_G`; otherwise
/// Generate. Both boundaries are inclusive.
pub fn decide(s_base: f64, s_adj: f64, t: &Thresholds) -> Mode {
    if s_base >= t.theta_return {
        Mode::Return
    } else if s_adj >= t.theta_guide {
        Mode::Guide
    } else {
        Mode::Generate
    }
}

/// The router's verdict for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDecision {
    pub mode: Mode,
    pub candidate: Option<CacheEntry>,
    pub s_base: f64,
    pub s_adj: f64,
    pub structural: f64,
    #[serde(default)]
    pub adaptations: Vec<AdaptationHint>,
    #[serde(default)]
    pub guidance: Option<String>,
    /// Set when the equivalence oracle failed and Guide was degraded.
    #[serde(default)]
    pub oracle_fallback: bool,
}

impl MatchDecision {
    fn generate(s_base: f64, s_adj: f64, structural: f64, oracle_fallback: bool) -> Self {
        Self {
            mode: Mode::Generate,
            candidate: None,
            s_base,
            s_adj,
            structural,
            adaptations: Vec::new(),
            guidance: None,
            oracle_fallback,
        }
    }

    /// Check the mode-dependent field invariants.
    pub fn is_consistent(&self) -> bool {
        match self.mode {
            Mode::Return => self.candidate.is_some() && self.guidance.is_none(),
            Mode::Guide => self.candidate.is_some() && self.guidance.is_some(),
            Mode::Generate => self.candidate.is_none() && self.guidance.is_none() && self.adaptations.is_empty(),
        }
    }
}

/// Matcher configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatcherConfig {
    pub thresholds: Thresholds,
    pub k: usize,
    pub boosts: BoostIncrements,
    pub weights: SimilarityWeights,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            k: 5,
            boosts: BoostIncrements::default(),
            weights: SimilarityWeights::default(),
        }
    }
}

/// One scored candidate during routing.
#[derive(Debug, Clone)]
pub struct RankedCandidate {
    pub entry: CacheEntry,
    pub s_base: f64,
    pub boost: BoostBreakdown,
    pub s_adj: f64,
}

/// Ties the cache, boosts, thresholds and equivalence oracle together.
#[derive(Debug, Clone)]
pub struct ReferenceMatcher<'a> {
    pub config: MatcherConfig,
    pub lexicon: &'a DomainLexicon,
}

impl<'a> ReferenceMatcher<'a> {
    pub fn new(config: MatcherConfig, lexicon: &'a DomainLexicon) -> Self {
        Self { config, lexicon }
    }

    /// Top-k candidates re-ranked by adjusted similarity (stable, so equal
    /// `s_adj` keeps the cache's `s_base` order).
    pub fn rank(
        &self,
        query: &str,
        embedding: &EmbeddingVector,
        cache: &dyn CacheAccess,
    ) -> Result<Vec<RankedCandidate>, MatchError> {
        let scored = cache.top_k(embedding, self.config.k.max(1))?;
        let mut ranked: Vec<RankedCandidate> = scored
            .into_iter()
            .map(|s| {
                let s_base = s.s_base.clamp(0.0, 1.0);
                let boost = compute_boost(query, &s.entry.question, self.lexicon, &self.config.boosts);
                RankedCandidate {
                    s_adj: adjusted_similarity(s_base, &boost),
                    entry: s.entry,
                    s_base,
                    boost,
                }
            })
            .collect();
        ranked.sort_by(|a, b| b.s_adj.total_cmp(&a.s_adj));
        Ok(ranked)
    }

    pub fn route(
        &self,
        query: &str,
        signature: &QuerySignature,
        embedding: &EmbeddingVector,
        cache: &dyn CacheAccess,
        oracle: &dyn EquivalenceOracle,
    ) -> Result<MatchDecision, MatchError> {
        let ranked = self.rank(query, embedding, cache)?;
        let Some(best_adj) = ranked.first() else {
            return Ok(MatchDecision::generate(0.0, 0.0, 0.0, false));
        };
        let best_base = ranked
            .iter()
            .reduce(|a, b| if b.s_base > a.s_base { b } else { a })
            .unwrap_or(best_adj);
        let structural = |e: &CacheEntry| structural_similarity(signature, &e.signature, &self.config.weights);

        match decide(best_base.s_base, best_adj.s_adj, &self.config.thresholds) {
            Mode::Return => Ok(MatchDecision {
                mode: Mode::Return,
                structural: structural(&best_base.entry),
                candidate: Some(best_base.entry.clone()),
                s_base: best_base.s_base,
                s_adj: best_base.s_adj,
                adaptations: Vec::new(),
                guidance: None,
                oracle_fallback: false,
            }),
            Mode::Guide => {
                let entries: Vec<&CacheEntry> = ranked.iter().map(|r| &r.entry).collect();
                let (verdict, fell_back) =
                    check_equivalence(oracle, EquivalenceQuery { text: query, signature }, &entries)?;
                if fell_back {
                    return Ok(MatchDecision::generate(
                        best_base.s_base,
                        best_adj.s_adj,
                        structural(&best_adj.entry),
                        true,
                    ));
                }
                let chosen = &ranked[verdict.matched_index.unwrap_or(0)];
                let guidance = format_guidance(&chosen.entry, &verdict.adaptations, chosen.s_adj);
                Ok(MatchDecision {
                    mode: Mode::Guide,
                    structural: structural(&chosen.entry),
                    candidate: Some(chosen.entry.clone()),
                    s_base: chosen.s_base,
                    s_adj: chosen.s_adj,
                    adaptations: verdict.adaptations,
                    guidance: Some(guidance),
                    oracle_fallback: false,
                })
            }
            Mode::Generate => Ok(MatchDecision::generate(
                best_base.s_base,
                best_adj.s_adj,
                structural(&best_adj.entry),
                false,
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boost(total: f64) -> BoostBreakdown {
        BoostBreakdown {
            location_norm: total,
            ..BoostBreakdown::zero()
        }
    }

    #[test]
    fn adjusted_examples() {
        assert!((adjusted_similarity(0.89, &boost(0.04)) - 0.93).abs() < 1e-12);
        assert_eq!(adjusted_similarity(0.98, &boost(0.08)), 0.99);
        assert_eq!(adjusted_similarity(0.50, &BoostBreakdown::zero()), 0.50);
    }

    #[test]
    fn decide_examples() {
        let t = Thresholds::default();
        assert_eq!(decide(0.997, 0.99, &t), Mode::Return);
        assert_eq!(decide(0.89, 0.89, &t), Mode::Guide);
        assert_eq!(decide(0.30, 0.34, &t), Mode::Generate);
        assert_eq!(decide(0.995, 0.99, &t), Mode::Return);
        assert_eq!(decide(0.2, 0.50, &t), Mode::Guide);
        assert_eq!(decide(0.2, 0.4999, &t), Mode::Generate);
    }

    #[test]
    fn boosted_score_never_returns() {
        let t = Thresholds::default();
        let s_adj = adjusted_similarity(0.99, &boost(0.5));
        assert_eq!(decide(0.99, s_adj, &t), Mode::Guide);
    }

    #[test]
    fn threshold_validation() {
        assert!(Thresholds::new(0.995, 0.5).is_ok());
        assert!(Thresholds::new(0.5, 0.5).is_err());
        assert!(Thresholds::new(1.1, 0.5).is_err());
        assert!(Thresholds::new(0.9, 0.0).is_err());
        assert!(serde_json::from_str::<Thresholds>(r#"{"theta_return":0.4,"theta_guide":0.5}"#).is_err());
    }
}
