//! Per-query agent pipeline.
//!
//! ```text
//! Guard ─off-domain─▶ Done
//!   │
//! Intent ─▶ Match ─Return─▶ Done
//!             │
//!           Guide / Generate
//!             ▼
//!           Plan ─▶ CodeGen ─▶ Execute ─ok─▶ Summarize ─▶ Insights ─▶ Done
//!                      ▲          │
//!                      └─error────┘   (at most two retries)
//! ```
//!
//! Every agent sits behind a trait so real model adapters and the
//! deterministic mocks in [`crate::mock`] are interchangeable. The runner is
//! a step function over [`PipelineState`]; each step writes a checkpoint, so
//! a run can be resumed from any stage boundary.

mod agents;
mod checkpoint;
mod runner;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use agents::{
    AgentError, AgentSuite, CodeGenerator, CodegenInput, Embedder, Executor, Guard, GuardVerdict,
    InsightsGenerator, IntentClassifier, IntentOutput, Planner, PlannerInput, Relevance, Summarizer,
};
pub use checkpoint::{CheckpointError, CheckpointStore, MemoryCheckpoints};
pub use runner::{baseline_tokens, retry_feedback, Pipeline, PipelineContext, RunRequest, RETRY_HEADER};

use crate::cache_store::CacheError;
use crate::matcher::{MatchDecision, MatchError, MatcherConfig};
use crate::prompt::ReductionReport;
use crate::signature::{QuerySignature, TableId};

/// Hard ceiling on code regeneration attempts after a failed execution.
pub const MAX_RETRIES: u8 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("agent failed outside a stage: {0}")]
    Agent(AgentError),
    #[error("max_retries {0} exceeds the limit of 2")]
    TooManyRetries(u8),
    #[error("state {0} is not resumable: {1}")]
    Corrupt(String, &'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Guard,
    Intent,
    Match,
    Plan,
    CodeGen,
    Execute,
    Summarize,
    Insights,
    Done,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Guard => "guard",
            Stage::Intent => "intent",
            Stage::Match => "match",
            Stage::Plan => "plan",
            Stage::CodeGen => "codegen",
            Stage::Execute => "execute",
            Stage::Summarize => "summarize",
            Stage::Insights => "insights",
            Stage::Done => "done",
        }
    }
}

/// How a terminal run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Off-domain; answered with guard guidance.
    Guarded,
    /// Served from the cache without generation.
    Cached,
    /// Planned, generated and executed successfully.
    Generated,
    /// An agent failed, or execution failed after all retries.
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionStatus {
    Ok,
    Error,
    Timeout,
}

/// A small result table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub status: ExecutionStatus,
    #[serde(default)]
    pub tables_out: Vec<DataTable>,
    #[serde(default)]
    pub text_out: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
}

impl ExecutionResult {
    pub fn ok(tables_out: Vec<DataTable>, text_out: impl Into<String>) -> Self {
        Self {
            status: ExecutionStatus::Ok,
            tables_out,
            text_out: text_out.into(),
            error_message: None,
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Self {
            status: ExecutionStatus::Error,
            tables_out: Vec::new(),
            text_out: String::new(),
            error_message: Some(message.into()),
        }
    }

    pub fn timeout(message: impl Into<String>) -> Self {
        Self {
            status: ExecutionStatus::Timeout,
            error_message: Some(message.into()),
            ..Self::error("")
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == ExecutionStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    /// Numeric text exactly as it appears in the execution output.
    pub value: String,
}

/// Structured business insights. Everything here must be derivable from the
/// execution result it was generated from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsightsRecord {
    pub metrics: Vec<Metric>,
    pub insights: Vec<String>,
    pub recommendations: Vec<String>,
    pub followups: Vec<String>,
}

impl InsightsRecord {
    /// Every metric value occurs verbatim in the result's tables or text.
    pub fn is_grounded_in(&self, exec: &ExecutionResult) -> bool {
        self.metrics.iter().all(|m| {
            exec.text_out.contains(m.value.as_str())
                || exec
                    .tables_out
                    .iter()
                    .flat_map(|t| t.rows.iter().flatten())
                    .any(|cell| cell.contains(m.value.as_str()))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub matcher: MatcherConfig,
    /// Regeneration attempts after a failed execution, at most 2.
    pub max_retries: u8,
    /// Insert successful Guide / Generate outcomes as new cache entries.
    pub populate: bool,
    pub summarize: bool,
    pub insights: bool,
    /// Pass the reference pattern of the matched entry's code to code generation.
    pub reference_patterns: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            matcher: MatcherConfig::default(),
            max_retries: MAX_RETRIES,
            populate: true,
            summarize: true,
            insights: true,
            reference_patterns: true,
        }
    }
}

/// Everything a run knows. Serializable so it can be checkpointed and
/// restored field-for-field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    pub run_id: String,
    pub query: String,
    /// Binds scripted mock behaviour; opaque to the runner.
    #[serde(default)]
    pub fixture_id: Option<String>,
    pub stage: Stage,
    pub guard_verdict: Option<GuardVerdict>,
    pub intent: Option<String>,
    #[serde(default)]
    pub tables: BTreeSet<TableId>,
    pub signature: Option<QuerySignature>,
    pub decision: Option<MatchDecision>,
    pub plan: Option<Vec<String>>,
    pub code: Option<String>,
    pub execution: Option<ExecutionResult>,
    pub summary: Option<String>,
    pub insights: Option<InsightsRecord>,
    pub retry_count: u8,
    pub executor_calls: u8,
    pub checkpoint_id: String,
    pub checkpoint_seq: u32,
    pub terminal: bool,
    pub response: Option<String>,
    pub outcome: Option<Outcome>,
    /// Planner + first code-generation prompt against the unfiltered baseline.
    pub prompt_tokens: Option<ReductionReport>,
    /// Free-form slots for adapters that track more than the modelled fields.
    #[serde(default)]
    pub extensions: BTreeMap<String, String>,
}

impl PipelineState {
    pub fn new(run_id: impl Into<String>, query: impl Into<String>, fixture_id: Option<String>) -> Self {
        Self {
            run_id: run_id.into(),
            query: query.into(),
            fixture_id,
            stage: Stage::Guard,
            guard_verdict: None,
            intent: None,
            tables: BTreeSet::new(),
            signature: None,
            decision: None,
            plan: None,
            code: None,
            execution: None,
            summary: None,
            insights: None,
            retry_count: 0,
            executor_calls: 0,
            checkpoint_id: String::new(),
            checkpoint_seq: 0,
            terminal: false,
            response: None,
            outcome: None,
            prompt_tokens: None,
            extensions: BTreeMap::new(),
        }
    }

    pub fn mode(&self) -> Option<crate::matcher::Mode> {
        self.decision.as_ref().map(|d| d.mode)
    }

    /// The state-level invariants.
    pub fn is_consistent(&self) -> bool {
        use crate::matcher::Mode;
        let retries = self.retry_count <= MAX_RETRIES && self.executor_calls <= MAX_RETRIES + 1;
        let response = !self.terminal || self.response.is_some();
        let returned = self.mode() != Some(Mode::Return) || (self.plan.is_none() && self.code.is_none());
        let exec = self
            .execution
            .as_ref()
            .is_none_or(|e| e.status == ExecutionStatus::Ok || e.error_message.is_some());
        retries && response && returned && exec
    }
}
