//! Seeding: turn reference question-answer pairs into cache entries.
//!
//! Each record is signed by the intent classifier and embedded by the hashed
//! embedder. Records without a plan get the planner's from-scratch plan;
//! records without code get the code generator's translation of that plan.
//! Entry ids derive from the normalized question and the schema hash, so
//! re-seeding the same corpus replaces entries instead of adding new ones.

use semcache_core::cache_store::EntryDraft;
use semcache_core::mock::MockAgents;
use semcache_core::pipeline::{CodeGenerator, CodegenInput};
use semcache_core::{CacheEntry, CacheStore};

use crate::error::{Error, Result};
use crate::files::SeedRecord;

/// Build the entry a seed record becomes.
pub fn seed_entry(agents: &MockAgents, record: &SeedRecord, schema_hash: &str, created_at: u64) -> Result<CacheEntry> {
    let question = record.question.trim();
    let intent = agents
        .intent
        .signature_of(question)
        .map_err(|e| Error::Input(format!("cannot sign {question:?}: {e}")))?;
    let plan = match &record.plan {
        Some(p) => p.clone(),
        None => agents.planner.scratch(question, &intent.signature),
    };
    let code = match &record.code {
        Some(c) => c.clone(),
        None => agents
            .codegen
            .generate(&CodegenInput {
                query: question,
                fixture_id: None,
                plan: &plan,
                prompt: "",
                reference_pattern: None,
                feedback: None,
                attempt: 0,
            })
            .map_err(|e| Error::Input(format!("cannot generate code for {question:?}: {e}")))?,
    };
    Ok(CacheEntry::new(EntryDraft {
        question: question.to_string(),
        signature: intent.signature,
        embedding: agents.embedder.vector(question),
        plan,
        code,
        response: record.response.clone(),
        schema_hash: schema_hash.to_string(),
        created_at,
    }))
}

/// Insert every record into `store` under `schema_hash`. Entries built
/// against another schema are invalidated first. Returns the number of
/// records seeded.
pub fn seed_store(store: &mut CacheStore, records: &[SeedRecord], agents: &MockAgents, schema_hash: &str) -> Result<usize> {
    if store.schema_hash() != Some(schema_hash) {
        store.invalidate_by_schema(schema_hash);
    }
    for (i, record) in records.iter().enumerate() {
        let entry = seed_entry(agents, record, schema_hash, store.next_created_at())
            .map_err(|e| Error::Input(format!("record {}: {e}", i + 1)))?;
        store.insert(entry)?;
    }
    Ok(records.len())
}
