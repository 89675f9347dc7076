//! Deterministic agent implementations.
//!
//! These stand in for model-backed agents in replay and tests. Every mock is
//! a pure function of its input (plus its construction parameters) and
//! counts its invocations, so tests can prove which stages ran.

mod agents;
mod embedder;
mod oracle;

use core::sync::atomic::{AtomicUsize, Ordering};

pub use agents::{
    MockCodeGenerator, MockExecutor, MockGuard, MockInsights, MockIntentClassifier, MockPlanner,
    MockSummarizer, ScriptedOutcome, OFF_DOMAIN_GUIDANCE,
};
pub use embedder::{HashedEmbedder, DEFAULT_DIMENSION};
pub use oracle::MockEquivalenceOracle;

use crate::lexicon::DomainLexicon;
use crate::pipeline::AgentSuite;

/// Thread-safe invocation counter.
#[derive(Debug, Default)]
pub struct CallCounter(AtomicUsize);

impl CallCounter {
    pub fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> usize {
        self.0.load(Ordering::Relaxed)
    }
}

/// The full mock roster over one lexicon.
#[derive(Debug)]
pub struct MockAgents {
    pub guard: MockGuard,
    pub intent: MockIntentClassifier,
    pub embedder: HashedEmbedder,
    pub oracle: MockEquivalenceOracle,
    pub planner: MockPlanner,
    pub codegen: MockCodeGenerator,
    pub executor: MockExecutor,
    pub summarizer: MockSummarizer,
    pub insights: MockInsights,
}

impl MockAgents {
    pub fn new(lexicon: &DomainLexicon, dimension: usize) -> Self {
        Self {
            guard: MockGuard::new(lexicon.clone()),
            intent: MockIntentClassifier::new(lexicon.clone()),
            embedder: HashedEmbedder::new(lexicon.clone(), dimension),
            oracle: MockEquivalenceOracle::new(lexicon.clone()),
            planner: MockPlanner::new(lexicon.clone()),
            codegen: MockCodeGenerator::default(),
            executor: MockExecutor::default(),
            summarizer: MockSummarizer::default(),
            insights: MockInsights::default(),
        }
    }

    pub fn with_executor(mut self, executor: MockExecutor) -> Self {
        self.executor = executor;
        self
    }

    pub fn suite(&self) -> AgentSuite<'_> {
        AgentSuite {
            guard: &self.guard,
            intent: &self.intent,
            embedder: &self.embedder,
            oracle: &self.oracle,
            planner: &self.planner,
            codegen: &self.codegen,
            executor: &self.executor,
            summarizer: Some(&self.summarizer),
            insights: Some(&self.insights),
        }
    }

    /// Invocations of the generation-side agents (planner, codegen, executor).
    pub fn generation_calls(&self) -> usize {
        self.planner.calls.get() + self.codegen.calls.get() + self.executor.calls.get()
    }
}

impl Default for MockAgents {
    fn default() -> Self {
        Self::new(&DomainLexicon::inventory(), DEFAULT_DIMENSION)
    }
}
