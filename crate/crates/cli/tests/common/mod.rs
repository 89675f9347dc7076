//! Shared setup: a synthetic world with its repository, schema and a helper
//! to seed caches and replay logs against it.

#![allow(dead_code)]

use semcache::files::{Fixtures, QueryLogRecord, SeedRecord};
use semcache::replay::{replay, ReplayConfig, ReplayInputs, ReplayOutput};
use semcache::synth::{generate, SynthConfig, World};
use semcache::{mock_agents, seed_store, SharedCache};
use semcache_core::mock::{MockAgents, DEFAULT_DIMENSION};
use semcache_core::prompt::CharEstimator;
use semcache_core::{
    CacheAccess, CacheStore, CheckpointStore, DomainLexicon, Mode, Pipeline, PipelineConfig, PipelineContext,
    PromptRepository, TableContext,
};

pub const WORKED_REFERENCE: &str = "What is the total stock value for item code ITEM-001-BB0 at Plant-A?";
pub const WORKED_CURRENT: &str = "What is the total stock value for item code ITEM-001-NN0 at Plant-B?";
pub const WORKED_RESPONSE: &str = "Total stock value: $12,500.00";

pub struct Bench {
    pub world: World,
    pub prompts: PromptRepository,
    pub tables: TableContext,
    pub lexicon: DomainLexicon,
    pub hash: String,
}

impl Bench {
    pub fn new(cfg: &SynthConfig) -> Self {
        let world = generate(cfg);
        let prompts = PromptRepository::new(world.fragments.clone(), world.schema.table_ids().unwrap()).unwrap();
        Self {
            prompts,
            tables: world.schema.table_context(),
            lexicon: DomainLexicon::inventory(),
            hash: world.schema.hash(),
            world,
        }
    }

    pub fn full() -> Self {
        Self::new(&SynthConfig::default())
    }

    pub fn small() -> Self {
        Self::new(&SynthConfig {
            corpus_size: 60,
            log_size: 50,
            ..SynthConfig::default()
        })
    }

    pub fn store(&self, corpus: &[SeedRecord]) -> CacheStore {
        let mut store = CacheStore::new(DEFAULT_DIMENSION);
        seed_store(&mut store, corpus, &mock_agents(DEFAULT_DIMENSION), &self.hash).unwrap();
        store
    }

    pub fn seeded(&self) -> CacheStore {
        self.store(&self.world.corpus)
    }

    pub fn replay(
        &self,
        cache: &SharedCache,
        log: &[QueryLogRecord],
        fixtures: &Fixtures,
        config: &ReplayConfig,
    ) -> semcache::Result<ReplayOutput> {
        let inputs = ReplayInputs {
            log,
            prompts: &self.prompts,
            tables: &self.tables,
            lexicon: &self.lexicon,
            fixtures,
            checkpoints: None,
        };
        replay(cache, &inputs, config)
    }

    pub fn pipeline<'a>(
        &'a self,
        agents: &'a MockAgents,
        cache: &'a dyn CacheAccess,
        checkpoints: &'a dyn CheckpointStore,
        config: PipelineConfig,
    ) -> Pipeline<'a> {
        let ctx = PipelineContext {
            cache,
            prompts: &self.prompts,
            tables: &self.tables,
            lexicon: &self.lexicon,
            checkpoints,
            estimator: &CharEstimator,
        };
        Pipeline::new(agents.suite(), ctx, config).unwrap()
    }
}

pub fn record(question: &str, response: &str) -> SeedRecord {
    SeedRecord {
        question: question.into(),
        response: response.into(),
        plan: None,
        code: None,
    }
}

pub fn query(q: &str) -> QueryLogRecord {
    QueryLogRecord {
        query: q.into(),
        expected_mode: None,
        expected_intent: None,
        fixture_id: None,
    }
}

pub fn expecting(q: &str, mode: Mode) -> QueryLogRecord {
    QueryLogRecord {
        expected_mode: Some(mode),
        ..query(q)
    }
}

pub fn no_populate() -> ReplayConfig {
    ReplayConfig {
        pipeline: PipelineConfig {
            populate: false,
            ..PipelineConfig::default()
        },
        workers: 1,
    }
}
