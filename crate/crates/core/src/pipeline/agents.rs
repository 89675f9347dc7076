//! Agent contracts.
//!
//! | agent               | input                              | output            |
//! |---------------------|------------------------------------|-------------------|
//! | `Guard`             | query                              | `GuardVerdict`    |
//! | `IntentClassifier`  | query                              | `IntentOutput`    |
//! | `Embedder`          | query                              | `EmbeddingVector` |
//! | `EquivalenceOracle` | query + signature, candidates      | verdict           |
//! | `Planner`           | `PlannerInput`                     | plan steps        |
//! | `CodeGenerator`     | `CodegenInput`                     | code              |
//! | `Executor`          | code                               | `ExecutionResult` |
//! | `Summarizer`        | query, `ExecutionResult`           | text              |
//! | `InsightsGenerator` | query, `ExecutionResult`           | `InsightsRecord`  |

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ExecutionResult, InsightsRecord};
use crate::matcher::{EmbeddingVector, EquivalenceOracle};
use crate::signature::{QuerySignature, TableId};

/// Failure reported by an agent.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct AgentError(pub String);

impl AgentError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relevance {
    Relevant,
    OffDomain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardVerdict {
    pub relevance: Relevance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guidance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentOutput {
    pub intent: String,
    pub tables: BTreeSet<TableId>,
    pub signature: QuerySignature,
}

#[derive(Debug, Clone, Copy)]
pub struct PlannerInput<'a> {
    pub query: &'a str,
    pub fixture_id: Option<&'a str>,
    pub intent: &'a str,
    pub signature: &'a QuerySignature,
    pub tables: &'a BTreeSet<TableId>,
    /// Assembled planner prompt.
    pub prompt: &'a str,
    /// Reference guidance block, present in Guide mode.
    pub guidance: Option<&'a str>,
}

#[derive(Debug, Clone, Copy)]
pub struct CodegenInput<'a> {
    pub query: &'a str,
    pub fixture_id: Option<&'a str>,
    pub plan: &'a [String],
    pub prompt: &'a str,
    /// Rendered reference pattern of the matched entry's code.
    pub reference_pattern: Option<&'a str>,
    /// Retry feedback; see [`super::retry_feedback`].
    pub feedback: Option<&'a str>,
    /// 0 for the first attempt.
    pub attempt: u8,
}

pub trait Guard {
    fn check(&self, query: &str) -> Result<GuardVerdict, AgentError>;
}

pub trait IntentClassifier {
    fn classify(&self, query: &str) -> Result<IntentOutput, AgentError>;
}

pub trait Embedder {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, AgentError>;
}

pub trait Planner {
    fn plan(&self, input: &PlannerInput<'_>) -> Result<Vec<String>, AgentError>;
}

pub trait CodeGenerator {
    fn generate(&self, input: &CodegenInput<'_>) -> Result<String, AgentError>;
}

/// Sandbox boundary. An `Err` is treated like an error result.
pub trait Executor {
    fn execute(&self, code: &str) -> Result<ExecutionResult, AgentError>;
}

pub trait Summarizer {
    fn summarize(&self, query: &str, result: &ExecutionResult) -> Result<String, AgentError>;
}

pub trait InsightsGenerator {
    fn insights(&self, query: &str, result: &ExecutionResult) -> Result<InsightsRecord, AgentError>;
}

/// One implementation per agent role, each independently replaceable.
#[derive(Clone, Copy)]
pub struct AgentSuite<'a> {
    pub guard: &'a dyn Guard,
    pub intent: &'a dyn IntentClassifier,
    pub embedder: &'a dyn Embedder,
    pub oracle: &'a dyn EquivalenceOracle,
    pub planner: &'a dyn Planner,
    pub codegen: &'a dyn CodeGenerator,
    pub executor: &'a dyn Executor,
    pub summarizer: Option<&'a dyn Summarizer>,
    pub insights: Option<&'a dyn InsightsGenerator>,
}
