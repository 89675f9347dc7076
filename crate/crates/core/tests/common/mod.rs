//! Shared fixtures: a small prompt repository over the 17-table schema and
//! helpers that seed the cache through the mock agents.

#![allow(dead_code)]

use std::cell::RefCell;

use semcache_core::cache_store::EntryDraft;
use semcache_core::lexicon::INVENTORY_TABLES;
use semcache_core::mock::{MockAgents, MockCodeGenerator, MockExecutor, DEFAULT_DIMENSION};
use semcache_core::pipeline::{CodeGenerator, CodegenInput, MemoryCheckpoints};
use semcache_core::prompt::CharEstimator;
use semcache_core::{
    Audience, CacheEntry, CacheStore, DomainLexicon, Pipeline, PipelineConfig, PipelineContext, PromptFragment,
    PromptRepository, TableContext, TableFilter, TableId,
};

pub const WORKED_REFERENCE: &str = "What is the total stock value for item code ITEM-001-BB0 at Plant-A?";
pub const WORKED_CURRENT: &str = "What is the total stock value for item code ITEM-001-NN0 at Plant-B?";
pub const SCHEMA_HASH: &str = "schema-v1";

pub fn t(name: &str) -> TableId {
    TableId::new(name).unwrap()
}

pub fn repository() -> PromptRepository {
    let mut frags = Vec::new();
    for audience in [Audience::Planner, Audience::Codegen] {
        let tag = if audience == Audience::Planner { "p" } else { "c" };
        frags.push(PromptFragment {
            id: format!("{tag}-global"),
            audience,
            priority: 0,
            tables: TableFilter::Global,
            text: "You answer inventory analytics questions step by step.".into(),
        });
        for (i, table) in INVENTORY_TABLES.iter().enumerate() {
            frags.push(PromptFragment {
                id: format!("{tag}-{table}"),
                audience,
                priority: 10 + i as i32,
                tables: TableFilter::Tables([t(table)].into_iter().collect()),
                text: format!("Rules for {table}: join on ITEM_CODE and ORGANIZATION_ID. ").repeat(8),
            });
        }
    }
    PromptRepository::new(frags, INVENTORY_TABLES.iter().map(|n| t(n))).unwrap()
}

pub fn table_context() -> TableContext {
    let mut ctx = TableContext::default();
    for table in INVENTORY_TABLES {
        ctx.descriptions
            .insert(t(table), format!("{table} columns: ITEM_CODE, ORGANIZATION_ID, QUANTITY, STOCK_VALUE."));
        ctx.sample_rows
            .insert(t(table), "ITEM_CODE|ORGANIZATION_ID|QUANTITY\nITEM-001-BB0|Plant-A|40".into());
    }
    ctx
}

pub fn cache() -> RefCell<CacheStore> {
    RefCell::new(CacheStore::new(DEFAULT_DIMENSION).with_schema_hash(SCHEMA_HASH))
}

/// Build a cache entry for `question` the way a successful Generate run would.
pub fn reference_entry(agents: &MockAgents, question: &str, response: &str, created_at: u64) -> CacheEntry {
    let intent = agents.intent.signature_of(question).unwrap();
    let plan = agents.planner.scratch(question, &intent.signature);
    let code = MockCodeGenerator::default()
        .generate(&CodegenInput {
            query: question,
            fixture_id: None,
            plan: &plan,
            prompt: "",
            reference_pattern: None,
            feedback: None,
            attempt: 0,
        })
        .unwrap();
    CacheEntry::new(EntryDraft {
        question: question.into(),
        signature: intent.signature,
        embedding: agents.embedder.vector(question),
        plan,
        code,
        response: response.into(),
        schema_hash: SCHEMA_HASH.into(),
        created_at,
    })
}

pub fn seed(cache: &RefCell<CacheStore>, agents: &MockAgents, questions: &[(&str, &str)]) {
    for (i, (q, r)) in questions.iter().enumerate() {
        cache.borrow_mut().insert(reference_entry(agents, q, r, i as u64)).unwrap();
    }
}

/// Everything a pipeline borrows, owned in one place.
pub struct Harness {
    pub lexicon: DomainLexicon,
    pub agents: MockAgents,
    pub cache: RefCell<CacheStore>,
    pub prompts: PromptRepository,
    pub tables: TableContext,
    pub checkpoints: MemoryCheckpoints,
}

impl Harness {
    pub fn new() -> Self {
        Self::with_executor(MockExecutor::default())
    }

    pub fn with_executor(executor: MockExecutor) -> Self {
        let lexicon = DomainLexicon::inventory();
        let agents = MockAgents::new(&lexicon, DEFAULT_DIMENSION).with_executor(executor);
        Self {
            lexicon,
            agents,
            cache: cache(),
            prompts: repository(),
            tables: table_context(),
            checkpoints: MemoryCheckpoints::new(),
        }
    }

    pub fn seeded(self, questions: &[(&str, &str)]) -> Self {
        seed(&self.cache, &self.agents, questions);
        self
    }

    pub fn pipeline(&self, config: PipelineConfig) -> Pipeline<'_> {
        let ctx = PipelineContext {
            cache: &self.cache,
            prompts: &self.prompts,
            tables: &self.tables,
            lexicon: &self.lexicon,
            checkpoints: &self.checkpoints,
            estimator: &CharEstimator,
        };
        Pipeline::new(self.agents.suite(), ctx, config).unwrap()
    }
}
