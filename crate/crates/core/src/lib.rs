//! Semantic cache engine for natural-language-to-code analytics.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure logic:
//!
//! - [`signature`]: structural query signatures, similarity keys and the
//!   weighted structural similarity score.
//! - [`matcher`]: embedding similarity, domain boosts, the dual-threshold
//!   Return / Guide / Generate decision, equivalence checking and reference
//!   guidance rendering.
//! - [`cache_store`]: the in-memory cache with exact top-k search and
//!   schema-hash invalidation.
//! - [`prompt`]: table-tagged prompt repository, intent-driven filtering,
//!   token accounting and reference-pattern extraction.
//! - [`pipeline`]: the per-query agent state machine with retries and
//!   checkpointing over pluggable agent traits.
//! - [`mock`]: deterministic agent implementations used for replay and tests.
//!
//! File formats, locking and the command-line harness live in the `semcache`
//! companion crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod cache_store;
pub mod lexicon;
pub mod matcher;
pub mod mock;
pub mod pipeline;
pub mod prompt;
pub mod signature;
pub mod text;

pub use cache_store::{
    schema_hash, CacheAccess, CacheEntry, CacheError, CacheStore, EntryId, ScoredEntry, StoreStats,
};
pub use lexicon::DomainLexicon;
pub use matcher::{
    adjusted_similarity, check_equivalence, compute_boost, cosine_similarity, decide,
    format_guidance, parse_guidance, AdaptationHint, BoostBreakdown, BoostIncrements,
    EmbeddingVector, EquivalenceOracle, EquivalenceVerdict, MatchDecision, MatchError, Mode,
    ReferenceMatcher, Thresholds,
};
pub use pipeline::{
    AgentSuite, CheckpointStore, DataTable, ExecutionResult, ExecutionStatus, InsightsRecord, Outcome,
    Pipeline, PipelineConfig, PipelineContext, PipelineError, PipelineState, RunRequest, Stage,
};
pub use prompt::{
    assemble, estimate_tokens, extract_reference_pattern, AssembledPrompt, Audience,
    PromptError, PromptFragment, PromptRepository, ReductionReport, ReferencePattern,
    TableContext, TableFilter,
};
pub use signature::{
    build_similarity_key, structural_similarity, QuerySignature, SignatureError,
    SimilarityWeights, TableId, Token,
};
