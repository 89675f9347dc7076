//! Offline replay of a query log through the pipeline with mock agents.
//!
//! Records are processed in log order. With `workers > 1` they run on a
//! thread pool against one shared cache; results are collected back in log
//! order and the report is an order-independent aggregate, so the output is
//! byte-identical to a sequential run. Parallel replay requires population
//! to be off: with population on, whether record 7 sees the entry record 3
//! inserted would depend on scheduling.

use std::path::Path;

use rayon::prelude::*;
use semcache_core::mock::{MockAgents, MockExecutor};
use semcache_core::pipeline::{baseline_tokens, MemoryCheckpoints};
use semcache_core::prompt::CharEstimator;
use semcache_core::{
    CacheAccess, CheckpointStore, DomainLexicon, Pipeline, PipelineConfig, PipelineContext, PromptRepository,
    RunRequest, TableContext,
};

use crate::error::{Error, Result};
use crate::files::{read_jsonl, write_json, write_jsonl, Fixtures, QueryLogRecord};
use crate::report::{ReplayReport, RouteLabel, TraceRecord};
use crate::shared::{FileCheckpoints, SharedCache};

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayConfig {
    pub pipeline: PipelineConfig,
    /// 1 runs sequentially on the calling thread.
    pub workers: usize,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            workers: 1,
        }
    }
}

impl ReplayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::Input("workers must be at least 1".into()));
        }
        if self.workers > 1 && self.pipeline.populate {
            return Err(Error::Input(
                "parallel replay needs population off (--populate false); otherwise results depend on scheduling"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Everything a replay reads besides the cache.
pub struct ReplayInputs<'a> {
    pub log: &'a [QueryLogRecord],
    pub prompts: &'a PromptRepository,
    pub tables: &'a TableContext,
    pub lexicon: &'a DomainLexicon,
    pub fixtures: &'a Fixtures,
    /// Persist checkpoints here instead of discarding them per record.
    pub checkpoints: Option<&'a FileCheckpoints>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutput {
    pub report: ReplayReport,
    pub trace: Vec<TraceRecord>,
}

pub fn run_id(index: usize) -> String {
    format!("q{index:05}")
}

pub fn replay(cache: &SharedCache, inputs: &ReplayInputs<'_>, config: &ReplayConfig) -> Result<ReplayOutput> {
    config.validate()?;
    for (i, r) in inputs.log.iter().enumerate() {
        if let Some(id) = &r.fixture_id {
            if !inputs.fixtures.contains_key(id) {
                return Err(Error::Input(format!(
                    "record {} ({:?}): fixture_id {id:?} has no binding in the fixtures file",
                    i + 1,
                    r.query
                )));
            }
        }
    }

    let baseline = baseline_tokens(inputs.prompts, inputs.tables, &CharEstimator);
    let agents = MockAgents::new(inputs.lexicon, cache.dimension())
        .with_executor(MockExecutor::new(inputs.fixtures.clone()));

    let run_one = |(index, record): (usize, &QueryLogRecord)| -> Result<TraceRecord> {
        let local = MemoryCheckpoints::new();
        let checkpoints: &dyn CheckpointStore = match inputs.checkpoints {
            Some(files) => files,
            None => &local,
        };
        let ctx = PipelineContext {
            cache,
            prompts: inputs.prompts,
            tables: inputs.tables,
            lexicon: inputs.lexicon,
            checkpoints,
            estimator: &CharEstimator,
        };
        let pipeline = Pipeline::with_baseline(agents.suite(), ctx, config.pipeline.clone(), baseline)?;
        let mut req = RunRequest::new(run_id(index), record.query.clone());
        req.fixture_id = record.fixture_id.clone();
        let (response, state) = pipeline.run(req)?;
        let decision = state.decision.as_ref();
        Ok(TraceRecord {
            index,
            query: record.query.clone(),
            route: RouteLabel::of(&state),
            s_base: decision.map(|d| d.s_base),
            s_adj: decision.map(|d| d.s_adj),
            candidate: decision
                .and_then(|d| d.candidate.as_ref())
                .map(|c| c.id.to_string()),
            adaptations: decision.map_or(0, |d| d.adaptations.len()),
            oracle_fallback: decision.is_some_and(|d| d.oracle_fallback),
            intent: state.intent.clone(),
            outcome: state.outcome.expect("terminal state has an outcome"),
            retry_count: state.retry_count,
            executor_calls: state.executor_calls,
            prompt_tokens: state.prompt_tokens,
            expected_mode: record.expected_mode,
            expected_intent: record.expected_intent.clone(),
            response,
        })
    };

    let trace: Vec<TraceRecord> = if config.workers == 1 {
        inputs.log.iter().enumerate().map(run_one).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Input(format!("cannot start {} workers: {e}", config.workers)))?;
        pool.install(|| inputs.log.par_iter().enumerate().map(run_one).collect::<Result<_>>())?
    };
    Ok(ReplayOutput {
        report: ReplayReport::from_trace(&trace),
        trace,
    })
}

pub const TRACE_FILE: &str = "trace.jsonl";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TEXT: &str = "report.txt";

/// Write `trace.jsonl`, `report.json` and `report.txt` into `dir`.
pub fn write_outputs(dir: &Path, out: &ReplayOutput) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_jsonl(&dir.join(TRACE_FILE), &out.trace)?;
    write_json(&dir.join(REPORT_JSON), &out.report)?;
    let text = dir.join(REPORT_TEXT);
    std::fs::write(&text, out.report.render_text()).map_err(|e| Error::io(&text, e))
}

pub fn load_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    read_jsonl(path)
}
