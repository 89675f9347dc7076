use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::agents::{AgentError, AgentSuite, CodegenInput, PlannerInput, Relevance};
use super::checkpoint::CheckpointStore;
use super::{ExecutionResult, ExecutionStatus, Outcome, PipelineConfig, PipelineError, PipelineState, Stage, MAX_RETRIES};
use crate::cache_store::{CacheAccess, CacheEntry, EntryDraft, EntryId};
use crate::lexicon::DomainLexicon;
use crate::matcher::{Mode, ReferenceMatcher};
use crate::prompt::{
    assemble, extract_reference_pattern, AssembledPrompt, Audience, PromptFragment, PromptRepository,
    ReductionReport, TableContext, TokenEstimator,
};

/// First line of the feedback handed to the code generator on a retry.
pub const RETRY_HEADER: &str = "PREVIOUS ATTEMPT FAILED:";

const DEFAULT_GUARD_GUIDANCE: &str = "This assistant only answers questions about the connected data.";

/// Feedback block for a regeneration attempt: the failure followed by the
/// code that produced it.
pub fn retry_feedback(error_message: &str, code: &str) -> String {
    format!("{RETRY_HEADER}\nError: {error_message}\nCode:\n{code}\n")
}

/// Identifies one run. `run_id` prefixes every checkpoint id of the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRequest {
    pub run_id: String,
    pub query: String,
    pub fixture_id: Option<String>,
}

impl RunRequest {
    pub fn new(run_id: impl Into<String>, query: impl Into<String>) -> Self {
        Self {
            run_id: run_id.into(),
            query: query.into(),
            fixture_id: None,
        }
    }

    pub fn with_fixture(mut self, fixture_id: impl Into<String>) -> Self {
        self.fixture_id = Some(fixture_id.into());
        self
    }
}

/// Shared resources a run reads from or writes to.
#[derive(Clone, Copy)]
pub struct PipelineContext<'a> {
    pub cache: &'a dyn CacheAccess,
    pub prompts: &'a PromptRepository,
    pub tables: &'a TableContext,
    pub lexicon: &'a DomainLexicon,
    pub checkpoints: &'a dyn CheckpointStore,
    pub estimator: &'a dyn TokenEstimator,
}

pub struct Pipeline<'a> {
    suite: AgentSuite<'a>,
    ctx: PipelineContext<'a>,
    config: PipelineConfig,
    /// Unfiltered planner and codegen prompt sizes.
    baseline: (usize, usize),
}

impl<'a> Pipeline<'a> {
    pub fn new(suite: AgentSuite<'a>, ctx: PipelineContext<'a>, config: PipelineConfig) -> Result<Self, PipelineError> {
        let baseline = baseline_tokens(ctx.prompts, ctx.tables, ctx.estimator);
        Self::with_baseline(suite, ctx, config, baseline)
    }

    /// Like [`Pipeline::new`] with a precomputed [`baseline_tokens`] result,
    /// for callers that build many pipelines over the same repository.
    pub fn with_baseline(
        suite: AgentSuite<'a>,
        ctx: PipelineContext<'a>,
        config: PipelineConfig,
        baseline: (usize, usize),
    ) -> Result<Self, PipelineError> {
        if config.max_retries > MAX_RETRIES {
            return Err(PipelineError::TooManyRetries(config.max_retries));
        }
        Ok(Self {
            suite,
            ctx,
            config,
            baseline,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Token count of the unfiltered planner and codegen prompts.
    pub fn baseline_tokens(&self) -> (usize, usize) {
        self.baseline
    }

    /// Fresh state at the guard stage, checkpointed as `{run_id}:000`.
    pub fn start(&self, req: RunRequest) -> Result<PipelineState, PipelineError> {
        let mut state = PipelineState::new(req.run_id, req.query, req.fixture_id);
        state.checkpoint_id = checkpoint_id(&state.run_id, 0);
        self.ctx.checkpoints.save(&state)?;
        Ok(state)
    }

    /// Run to completion and return the response with the final state.
    pub fn run(&self, req: RunRequest) -> Result<(String, PipelineState), PipelineError> {
        let state = self.start(req)?;
        self.drive(state)
    }

    /// Continue a checkpointed run to completion.
    pub fn resume(&self, checkpoint_id: &str) -> Result<(String, PipelineState), PipelineError> {
        let state = self.ctx.checkpoints.load(checkpoint_id)?;
        self.drive(state)
    }

    pub fn drive(&self, mut state: PipelineState) -> Result<(String, PipelineState), PipelineError> {
        while !state.terminal {
            self.step(&mut state)?;
        }
        let response = state
            .response
            .clone()
            .ok_or(PipelineError::Corrupt(state.checkpoint_id.clone(), "terminal without response"))?;
        Ok((response, state))
    }

    /// Execute the current stage, advance, and checkpoint. A no-op on a
    /// terminal state.
    pub fn step(&self, state: &mut PipelineState) -> Result<(), PipelineError> {
        if state.terminal {
            return Ok(());
        }
        match state.stage {
            Stage::Guard => self.guard(state),
            Stage::Intent => self.intent(state),
            Stage::Match => self.match_stage(state)?,
            Stage::Plan => self.plan(state),
            Stage::CodeGen => self.codegen(state),
            Stage::Execute => self.execute(state),
            Stage::Summarize => self.summarize(state),
            Stage::Insights => self.insights(state),
            Stage::Done => return Err(PipelineError::Corrupt(state.checkpoint_id.clone(), "done but not terminal")),
        }
        if state.terminal {
            self.record_outcome(state)?;
        }
        state.checkpoint_seq += 1;
        state.checkpoint_id = checkpoint_id(&state.run_id, state.checkpoint_seq);
        self.ctx.checkpoints.save(state)?;
        Ok(())
    }

    fn guard(&self, state: &mut PipelineState) {
        match self.suite.guard.check(&state.query) {
            Err(e) => fail(state, e),
            Ok(v) => {
                if v.relevance == Relevance::OffDomain {
                    let text = v.guidance.clone().unwrap_or_else(|| DEFAULT_GUARD_GUIDANCE.to_string());
                    finish(state, Outcome::Guarded, text);
                } else {
                    state.stage = Stage::Intent;
                }
                state.guard_verdict = Some(v);
            }
        }
    }

    fn intent(&self, state: &mut PipelineState) {
        match self.suite.intent.classify(&state.query) {
            Err(e) => fail(state, e),
            Ok(out) => {
                state.intent = Some(out.intent);
                state.tables = out.tables;
                state.signature = Some(out.signature);
                state.stage = Stage::Match;
            }
        }
    }

    fn match_stage(&self, state: &mut PipelineState) -> Result<(), PipelineError> {
        let Some(signature) = state.signature.as_ref() else {
            return Err(PipelineError::Corrupt(state.checkpoint_id.clone(), "match without signature"));
        };
        let embedding = match self.suite.embedder.embed(&state.query) {
            Ok(e) => e,
            Err(e) => {
                fail(state, e);
                return Ok(());
            }
        };
        let matcher = ReferenceMatcher::new(self.config.matcher.clone(), self.ctx.lexicon);
        let decision = matcher.route(&state.query, signature, &embedding, self.ctx.cache, self.suite.oracle)?;
        if decision.mode == Mode::Return {
            let response = decision.candidate.as_ref().map(|c| c.response.clone()).unwrap_or_default();
            state.decision = Some(decision);
            finish(state, Outcome::Cached, response);
        } else {
            state.decision = Some(decision);
            state.stage = Stage::Plan;
        }
        Ok(())
    }

    fn prompt(&self, state: &PipelineState, audience: Audience) -> Result<AssembledPrompt, AgentError> {
        let fragments: Vec<&PromptFragment> = self
            .ctx
            .prompts
            .filter_by_tables(audience, &state.tables)
            .map_err(|e| AgentError::new(e.to_string()))?;
        Ok(assemble(&fragments, &state.tables, self.ctx.tables, self.ctx.estimator))
    }

    fn plan(&self, state: &mut PipelineState) {
        let prompt = match self.prompt(state, Audience::Planner) {
            Ok(p) => p,
            Err(e) => return fail(state, e),
        };
        let (Some(intent), Some(signature)) = (state.intent.as_deref(), state.signature.as_ref()) else {
            return fail(state, AgentError::new("planner input incomplete"));
        };
        let guidance = state
            .decision
            .as_ref()
            .filter(|d| d.mode == Mode::Guide)
            .and_then(|d| d.guidance.as_deref());
        let input = PlannerInput {
            query: &state.query,
            fixture_id: state.fixture_id.as_deref(),
            intent,
            signature,
            tables: &state.tables,
            prompt: &prompt.text,
            guidance,
        };
        match self.suite.planner.plan(&input) {
            Err(e) => fail(state, e),
            Ok(steps) => {
                state.plan = Some(steps);
                state.prompt_tokens = Some(ReductionReport::new(self.baseline.0, prompt.token_count));
                state.stage = Stage::CodeGen;
            }
        }
    }

    fn codegen(&self, state: &mut PipelineState) {
        let prompt = match self.prompt(state, Audience::Codegen) {
            Ok(p) => p,
            Err(e) => return fail(state, e),
        };
        let pattern = state
            .decision
            .as_ref()
            .filter(|d| self.config.reference_patterns && d.mode == Mode::Guide)
            .and_then(|d| d.candidate.as_ref())
            .map(|c| extract_reference_pattern(&c.code))
            .filter(|p| !p.is_empty())
            .map(|p| p.render());
        let feedback = match (&state.execution, &state.code) {
            (Some(exec), Some(code)) if state.retry_count > 0 && !exec.is_ok() => Some(retry_feedback(
                exec.error_message.as_deref().unwrap_or_default(),
                code,
            )),
            _ => None,
        };
        let Some(plan) = state.plan.as_deref() else {
            return fail(state, AgentError::new("code generation without a plan"));
        };
        let input = CodegenInput {
            query: &state.query,
            fixture_id: state.fixture_id.as_deref(),
            plan,
            prompt: &prompt.text,
            reference_pattern: pattern.as_deref(),
            feedback: feedback.as_deref(),
            attempt: state.retry_count,
        };
        match self.suite.codegen.generate(&input) {
            Err(e) => fail(state, e),
            Ok(code) => {
                if state.retry_count == 0 {
                    let cg = ReductionReport::new(self.baseline.1, prompt.token_count);
                    state.prompt_tokens = Some(match state.prompt_tokens {
                        Some(p) => p.combine(&cg),
                        None => cg,
                    });
                }
                state.code = Some(code);
                state.stage = Stage::Execute;
            }
        }
    }

    fn execute(&self, state: &mut PipelineState) {
        let Some(code) = state.code.as_deref() else {
            return fail(state, AgentError::new("execution without code"));
        };
        state.executor_calls += 1;
        let mut result = self
            .suite
            .executor
            .execute(code)
            .unwrap_or_else(|e| ExecutionResult::error(e.0));
        if result.status != ExecutionStatus::Ok && result.error_message.is_none() {
            result.error_message = Some("execution failed without a message".to_string());
        }
        let ok = result.is_ok();
        let message = result.error_message.clone().unwrap_or_default();
        state.execution = Some(result);
        if ok {
            self.after(state, Stage::Execute);
        } else if state.retry_count < self.config.max_retries {
            state.retry_count += 1;
            state.stage = Stage::CodeGen;
        } else {
            finish(state, Outcome::Failed, format!("error: {message}"));
        }
    }

    fn summarize(&self, state: &mut PipelineState) {
        if let (Some(s), Some(exec)) = (self.suite.summarizer, state.execution.as_ref()) {
            match s.summarize(&state.query, exec) {
                Ok(text) => state.summary = Some(text),
                Err(e) => return fail(state, e),
            }
        }
        self.after(state, Stage::Summarize);
    }

    fn insights(&self, state: &mut PipelineState) {
        if let (Some(g), Some(exec)) = (self.suite.insights, state.execution.as_ref()) {
            match g.insights(&state.query, exec) {
                Ok(rec) => state.insights = Some(rec),
                Err(e) => return fail(state, e),
            }
        }
        self.after(state, Stage::Insights);
    }

    /// Move past a successful stage, skipping disabled optional stages.
    fn after(&self, state: &mut PipelineState, done: Stage) {
        let summarize = self.config.summarize && self.suite.summarizer.is_some();
        let insights = self.config.insights && self.suite.insights.is_some();
        let next = match done {
            Stage::Execute if summarize => Stage::Summarize,
            Stage::Execute | Stage::Summarize if insights => Stage::Insights,
            _ => Stage::Done,
        };
        if next == Stage::Done {
            let response = state
                .summary
                .clone()
                .or_else(|| state.execution.as_ref().map(|e| e.text_out.clone()))
                .unwrap_or_default();
            finish(state, Outcome::Generated, response);
        } else {
            state.stage = next;
        }
    }

    /// Feed a terminal run back into the cache: a Return bumps the served
    /// entry's hit counter; a successful Guide bumps the reference's guide
    /// counter; successful Guide and Generate runs are inserted as new
    /// entries when population is enabled. Anything else is a no-op.
    pub fn record_outcome(&self, state: &PipelineState) -> Result<Option<EntryId>, PipelineError> {
        let Some(decision) = state.decision.as_ref().filter(|_| state.terminal) else {
            return Ok(None);
        };
        match (decision.mode, state.outcome) {
            (Mode::Return, Some(Outcome::Cached)) => {
                if let Some(c) = &decision.candidate {
                    self.ctx.cache.record_hit(&c.id, Mode::Return);
                }
                Ok(None)
            }
            (Mode::Guide | Mode::Generate, Some(Outcome::Generated)) => {
                if let (Mode::Guide, Some(c)) = (decision.mode, &decision.candidate) {
                    self.ctx.cache.record_hit(&c.id, Mode::Guide);
                }
                if !self.config.populate {
                    return Ok(None);
                }
                let (Some(signature), Some(plan), Some(code), Some(response)) =
                    (&state.signature, &state.plan, &state.code, &state.response)
                else {
                    return Ok(None);
                };
                let embedding = self.suite.embedder.embed(&state.query).map_err(PipelineError::Agent)?;
                let entry = CacheEntry::new(EntryDraft {
                    question: state.query.clone(),
                    signature: signature.clone(),
                    embedding,
                    plan: plan.clone(),
                    code: code.clone(),
                    response: response.clone(),
                    schema_hash: self.ctx.cache.schema_hash().unwrap_or_default(),
                    created_at: self.ctx.cache.next_created_at(),
                });
                Ok(Some(self.ctx.cache.insert(entry)?))
            }
            _ => Ok(None),
        }
    }
}

fn checkpoint_id(run_id: &str, seq: u32) -> String {
    format!("{run_id}:{seq:03}")
}

/// Token counts of the unfiltered planner and codegen prompts: every
/// fragment of the audience plus the blocks of every known table.
pub fn baseline_tokens(
    prompts: &PromptRepository,
    tables: &TableContext,
    estimator: &dyn TokenEstimator,
) -> (usize, usize) {
    let full = |audience| {
        let all: Vec<&PromptFragment> = prompts.all(audience).iter().collect();
        assemble(&all, prompts.known_tables(), tables, estimator).token_count
    };
    (full(Audience::Planner), full(Audience::Codegen))
}

fn finish(state: &mut PipelineState, outcome: Outcome, response: String) {
    state.outcome = Some(outcome);
    state.response = Some(response);
    state.terminal = true;
    state.stage = Stage::Done;
}

fn fail(state: &mut PipelineState, err: AgentError) {
    let stage = state.stage.as_str();
    state.extensions.insert("failed_stage".to_string(), stage.to_string());
    finish(state, Outcome::Failed, format!("error: {stage}: {err}"));
}
