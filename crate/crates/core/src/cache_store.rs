//! In-memory cache of answered questions.
//!
//! Entries are keyed by a digest of their normalized question and schema
//! hash, so re-inserting the same question under the same schema replaces
//! the earlier entry. Nearest-neighbour search is exhaustive. Invalidation
//! marks entries rather than deleting them.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::matcher::{EmbeddingVector, Mode};
use crate::signature::{build_similarity_key, QuerySignature};
use crate::text::{normalize_table, normalize_text};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CacheError {
    #[error("embedding dimension mismatch: store has {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding for {0} is the zero vector")]
    ZeroEmbedding(String),
    #[error("top_k requires k >= 1")]
    InvalidK,
    #[error("entry {id}: similarity key {stored:?} does not match its signature")]
    KeyMismatch { id: String, stored: String },
}

/// Stable entry identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntryId(String);

impl EntryId {
    /// `q` followed by the first 16 hex digits of
    /// `sha256(normalized question, NUL, schema hash)`.
    pub fn derive(question: &str, schema_hash: &str) -> Self {
        let mut h = Sha256::new();
        h.update(normalize_text(question).as_bytes());
        h.update([0u8]);
        h.update(schema_hash.as_bytes());
        let digest = hex::encode(h.finalize());
        let mut id = String::with_capacity(17);
        id.push('q');
        id.push_str(&digest[..16]);
        Self(id)
    }

    pub fn from_raw(raw: impl Into<String>) -> Self {
        Self(raw.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A cached question with everything needed to return or adapt it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub id: EntryId,
    pub question: String,
    pub signature: QuerySignature,
    pub similarity_key: String,
    pub embedding: EmbeddingVector,
    pub plan: Vec<String>,
    pub code: String,
    pub response: String,
    pub schema_hash: String,
    /// Monotone insertion tick; larger is newer.
    pub created_at: u64,
    #[serde(default)]
    pub return_hits: u64,
    #[serde(default)]
    pub guide_hits: u64,
    #[serde(default)]
    pub invalidated: bool,
}

/// Fields supplied by the caller when creating an entry.
#[derive(Debug, Clone)]
pub struct EntryDraft {
    pub question: String,
    pub signature: QuerySignature,
    pub embedding: EmbeddingVector,
    pub plan: Vec<String>,
    pub code: String,
    pub response: String,
    pub schema_hash: String,
    pub created_at: u64,
}

impl CacheEntry {
    pub fn new(d: EntryDraft) -> Self {
        Self {
            id: EntryId::derive(&d.question, &d.schema_hash),
            similarity_key: build_similarity_key(&d.signature),
            question: d.question,
            signature: d.signature,
            embedding: d.embedding,
            plan: d.plan,
            code: d.code,
            response: d.response,
            schema_hash: d.schema_hash,
            created_at: d.created_at,
            return_hits: 0,
            guide_hits: 0,
            invalidated: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreStats {
    pub entry_count: usize,
    pub live_count: usize,
    pub return_hits_total: u64,
    pub guide_hits_total: u64,
    pub invalidated_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredEntry {
    pub entry: CacheEntry,
    pub s_base: f64,
}

#[derive(Debug, Clone)]
struct Stored {
    entry: CacheEntry,
    unit: Vec<f64>,
}

fn unit_vector(e: &EmbeddingVector) -> Option<Vec<f64>> {
    let n = e.norm();
    (n > 0.0).then(|| e.values().iter().map(|&v| f64::from(v) / n).collect())
}

#[derive(Debug, Clone)]
pub struct CacheStore {
    dimension: usize,
    entries: BTreeMap<EntryId, Stored>,
    by_question: BTreeMap<(String, String), EntryId>,
    schema_hash: Option<String>,
    max_entries: Option<usize>,
    clock: u64,
}

impl CacheStore {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            entries: BTreeMap::new(),
            by_question: BTreeMap::new(),
            schema_hash: None,
            max_entries: None,
            clock: 0,
        }
    }

    /// Bound the store size; the oldest entries are evicted first.
    pub fn with_max_entries(mut self, max: usize) -> Self {
        self.max_entries = Some(max.max(1));
        self
    }

    pub fn with_schema_hash(mut self, hash: impl Into<String>) -> Self {
        self.schema_hash = Some(hash.into());
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The schema hash new entries are stamped with.
    pub fn schema_hash(&self) -> Option<&str> {
        self.schema_hash.as_deref()
    }

    pub fn set_schema_hash(&mut self, hash: impl Into<String>) {
        self.schema_hash = Some(hash.into());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &EntryId) -> Option<&CacheEntry> {
        self.entries.get(id).map(|s| &s.entry)
    }

    /// All entries, including invalidated ones, in id order.
    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.entries.values().map(|s| &s.entry)
    }

    /// One past the newest `created_at` seen.
    pub fn next_created_at(&self) -> u64 {
        self.clock
    }

    pub fn insert(&mut self, entry: CacheEntry) -> Result<EntryId, CacheError> {
        if entry.embedding.dimension() != self.dimension {
            return Err(CacheError::DimensionMismatch {
                expected: self.dimension,
                got: entry.embedding.dimension(),
            });
        }
        if entry.similarity_key != build_similarity_key(&entry.signature) {
            return Err(CacheError::KeyMismatch {
                id: entry.id.to_string(),
                stored: entry.similarity_key,
            });
        }
        let unit = unit_vector(&entry.embedding).ok_or_else(|| CacheError::ZeroEmbedding(entry.id.to_string()))?;

        let qkey = (normalize_text(&entry.question), entry.schema_hash.clone());
        if let Some(prev) = self.by_question.get(&qkey) {
            if *prev != entry.id {
                let prev = prev.clone();
                self.entries.remove(&prev);
            }
        }
        if let Some(old) = self.entries.get(&entry.id) {
            let old_key = (normalize_text(&old.entry.question), old.entry.schema_hash.clone());
            if old_key != qkey {
                self.by_question.remove(&old_key);
            }
        }
        let id = entry.id.clone();
        self.clock = self.clock.max(entry.created_at.saturating_add(1));
        self.by_question.insert(qkey, id.clone());
        self.entries.insert(id.clone(), Stored { entry, unit });
        self.evict_overflow(&id);
        Ok(id)
    }

    fn evict_overflow(&mut self, keep: &EntryId) {
        let Some(max) = self.max_entries else { return };
        while self.entries.len() > max {
            let oldest = self
                .entries
                .values()
                .filter(|s| s.entry.id != *keep)
                .min_by(|a, b| {
                    a.entry
                        .created_at
                        .cmp(&b.entry.created_at)
                        .then_with(|| a.entry.id.cmp(&b.entry.id))
                })
                .map(|s| s.entry.id.clone());
            let Some(id) = oldest else { return };
            if let Some(s) = self.entries.remove(&id) {
                self.by_question
                    .remove(&(normalize_text(&s.entry.question), s.entry.schema_hash));
            }
        }
    }

    /// Live entries by descending cosine similarity; ties (to 1e-12) go to
    /// the newer entry, then the smaller id.
    pub fn top_k(&self, probe: &EmbeddingVector, k: usize) -> Result<Vec<ScoredEntry>, CacheError> {
        if k == 0 {
            return Err(CacheError::InvalidK);
        }
        if probe.dimension() != self.dimension {
            return Err(CacheError::DimensionMismatch {
                expected: self.dimension,
                got: probe.dimension(),
            });
        }
        let probe_unit = unit_vector(probe).ok_or_else(|| CacheError::ZeroEmbedding("probe".to_string()))?;
        let mut scored: Vec<(&Stored, f64)> = self
            .entries
            .values()
            .filter(|s| !s.entry.invalidated)
            .map(|s| {
                let dot: f64 = s.unit.iter().zip(&probe_unit).map(|(a, b)| a * b).sum();
                (s, dot.clamp(-1.0, 1.0))
            })
            .collect();
        // Scores equal to 1e-12 are ties, so parallel vectors compare equal
        // despite rounding in the normalization.
        let tie_key = |s: f64| libm::round(s * 1e12) as i64;
        scored.sort_by(|(a, sa), (b, sb)| {
            tie_key(*sb)
                .cmp(&tie_key(*sa))
                .then_with(|| b.entry.created_at.cmp(&a.entry.created_at))
                .then_with(|| a.entry.id.cmp(&b.entry.id))
        });
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(s, s_base)| ScoredEntry {
                entry: s.entry.clone(),
                s_base,
            })
            .collect())
    }

    /// Mark every live entry whose schema hash differs from `current_hash` as
    /// invalid and adopt `current_hash` for new entries. Returns the number of
    /// entries newly invalidated.
    pub fn invalidate_by_schema(&mut self, current_hash: &str) -> usize {
        self.schema_hash = Some(current_hash.to_string());
        let mut count = 0;
        for s in self.entries.values_mut() {
            if !s.entry.invalidated && s.entry.schema_hash != current_hash {
                s.entry.invalidated = true;
                count += 1;
            }
        }
        count
    }

    pub fn record_hit(&mut self, id: &EntryId, mode: Mode) -> bool {
        let Some(s) = self.entries.get_mut(id) else { return false };
        match mode {
            Mode::Return => s.entry.return_hits += 1,
            Mode::Guide => s.entry.guide_hits += 1,
            Mode::Generate => return false,
        }
        true
    }

    pub fn stats(&self) -> StoreStats {
        let mut st = StoreStats {
            entry_count: self.entries.len(),
            ..StoreStats::default()
        };
        for s in self.entries.values() {
            st.return_hits_total += s.entry.return_hits;
            st.guide_hits_total += s.entry.guide_hits;
            if s.entry.invalidated {
                st.invalidated_count += 1;
            } else {
                st.live_count += 1;
            }
        }
        st
    }
}

/// Shared-reference access to a cache, so one store can back many pipeline
/// runs. Implementations serialize mutations and give readers a consistent
/// snapshot.
pub trait CacheAccess {
    fn dimension(&self) -> usize;
    fn top_k(&self, probe: &EmbeddingVector, k: usize) -> Result<Vec<ScoredEntry>, CacheError>;
    fn insert(&self, entry: CacheEntry) -> Result<EntryId, CacheError>;
    fn record_hit(&self, id: &EntryId, mode: Mode) -> bool;
    fn schema_hash(&self) -> Option<String>;
    fn next_created_at(&self) -> u64;
    fn stats(&self) -> StoreStats;
}

/// Single-threaded access.
impl CacheAccess for RefCell<CacheStore> {
    fn dimension(&self) -> usize {
        self.borrow().dimension()
    }
    fn top_k(&self, probe: &EmbeddingVector, k: usize) -> Result<Vec<ScoredEntry>, CacheError> {
        self.borrow().top_k(probe, k)
    }
    fn insert(&self, entry: CacheEntry) -> Result<EntryId, CacheError> {
        self.borrow_mut().insert(entry)
    }
    fn record_hit(&self, id: &EntryId, mode: Mode) -> bool {
        self.borrow_mut().record_hit(id, mode)
    }
    fn schema_hash(&self) -> Option<String> {
        self.borrow().schema_hash().map(ToString::to_string)
    }
    fn next_created_at(&self) -> u64 {
        self.borrow().next_created_at()
    }
    fn stats(&self) -> StoreStats {
        self.borrow().stats()
    }
}

/// Digest of a table → columns mapping. Table and column names are
/// canonicalized to uppercase and sorted, so only the schema's content
/// matters, not its spelling or order.
pub fn schema_hash<'a, I, C>(tables: I) -> String
where
    I: IntoIterator<Item = (&'a str, C)>,
    C: IntoIterator<Item = &'a str>,
{
    let mut canon: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (table, cols) in tables {
        let entry = canon.entry(normalize_table(table)).or_default();
        entry.extend(cols.into_iter().map(normalize_table));
    }
    let mut h = Sha256::new();
    for (table, mut cols) in canon {
        cols.sort();
        cols.dedup();
        h.update(table.as_bytes());
        h.update(b":");
        h.update(cols.join(",").as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn worked_signature() -> QuerySignature {
        QuerySignature::new("valuation", "analytical", "sum", "value", "item", "INVENTORY_MASTER")
            .unwrap()
            .with_filters(["item_code", "location"])
            .unwrap()
    }

    pub(crate) fn worked_reference_entry() -> CacheEntry {
        CacheEntry::new(EntryDraft {
            question: "What is the total stock value for item code ITEM-001-BB0 at Plant-A?".into(),
            signature: worked_signature(),
            embedding: EmbeddingVector::new(vec![1.0, 0.0, 0.0]).unwrap(),
            plan: vec![
                "Load INVENTORY_MASTER table".into(),
                "Filter by ITEM_CODE = 'ITEM-001-BB0'".into(),
                "Filter by ORGANIZATION = 'Plant-A'".into(),
                "Calculate sum of STOCK_VALUE".into(),
                "Format as currency output".into(),
            ],
            code: "df = load_table(\"INVENTORY_MASTER\")".into(),
            response: "Total stock value: $12,500.00".into(),
            schema_hash: "h1".into(),
            created_at: 0,
        })
    }

    fn entry(q: &str, emb: &[f32], hash: &str, t: u64) -> CacheEntry {
        CacheEntry::new(EntryDraft {
            question: q.into(),
            signature: worked_signature(),
            embedding: EmbeddingVector::new(emb.to_vec()).unwrap(),
            plan: vec![],
            code: String::new(),
            response: q.into(),
            schema_hash: hash.into(),
            created_at: t,
        })
    }

    #[test]
    fn insert_then_get() {
        let mut s = CacheStore::new(3);
        let e = worked_reference_entry();
        let id = s.insert(e.clone()).unwrap();
        assert_eq!(s.get(&id), Some(&e));
        assert_eq!(s.next_created_at(), 1);
    }

    #[test]
    fn same_question_replaces() {
        let mut s = CacheStore::new(2);
        s.insert(entry("Stock at Plant-A?", &[1.0, 0.0], "h", 0)).unwrap();
        let before = s.stats().entry_count;
        let id = s.insert(entry("  stock AT plant-a ", &[0.0, 1.0], "h", 1)).unwrap();
        assert_eq!(s.stats().entry_count, before);
        assert_eq!(s.get(&id).unwrap().embedding.values(), &[0.0, 1.0]);
        // different schema hash is a different entry
        s.insert(entry("Stock at Plant-A?", &[1.0, 0.0], "h2", 2)).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn dimension_and_zero_checks() {
        let mut s = CacheStore::new(2);
        assert!(matches!(
            s.insert(entry("x", &[1.0, 0.0, 0.0], "h", 0)),
            Err(CacheError::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert!(matches!(s.insert(entry("x", &[0.0, 0.0], "h", 0)), Err(CacheError::ZeroEmbedding(_))));
        let probe = EmbeddingVector::new(vec![1.0]).unwrap();
        assert!(s.top_k(&probe, 1).is_err());
        let probe = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(s.top_k(&probe, 0), Err(CacheError::InvalidK));
    }

    #[test]
    fn key_mismatch_rejected() {
        let mut s = CacheStore::new(3);
        let mut e = worked_reference_entry();
        e.similarity_key.push('x');
        assert!(matches!(s.insert(e), Err(CacheError::KeyMismatch { .. })));
    }

    #[test]
    fn top_k_empty_and_truncated() {
        let mut s = CacheStore::new(2);
        let probe = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
        assert!(s.top_k(&probe, 5).unwrap().is_empty());
        for (i, q) in ["a", "b", "c"].iter().enumerate() {
            s.insert(entry(q, &[1.0, i as f32], "h", i as u64)).unwrap();
        }
        assert_eq!(s.top_k(&probe, 5).unwrap().len(), 3);
    }

    #[test]
    fn ties_prefer_newer_then_id() {
        let mut s = CacheStore::new(2);
        s.insert(entry("old", &[1.0, 1.0], "h", 1)).unwrap();
        s.insert(entry("new", &[2.0, 2.0], "h", 5)).unwrap();
        s.insert(entry("x1", &[3.0, 3.0], "h", 3)).unwrap();
        let probe = EmbeddingVector::new(vec![1.0, 1.0]).unwrap();
        let got: Vec<u64> = s.top_k(&probe, 3).unwrap().iter().map(|r| r.entry.created_at).collect();
        assert_eq!(got, [5, 3, 1]);
    }

    #[test]
    fn invalidation_is_idempotent_and_hides_entries() {
        let mut s = CacheStore::new(2);
        for i in 0..10u64 {
            let hash = if i < 7 { "old" } else { "new" };
            s.insert(entry(&alloc::format!("q{i}"), &[1.0, i as f32], hash, i)).unwrap();
        }
        assert_eq!(s.invalidate_by_schema("new"), 7);
        assert_eq!(s.invalidate_by_schema("new"), 0);
        assert_eq!(s.stats().invalidated_count, 7);
        let probe = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
        let hits = s.top_k(&probe, 10).unwrap();
        assert_eq!(hits.len(), 3);
        assert!(hits.iter().all(|h| !h.entry.invalidated));
        assert_eq!(s.invalidate_by_schema("newer"), 3);
        assert!(s.top_k(&probe, 10).unwrap().is_empty());
    }

    #[test]
    fn all_current_hash_invalidates_nothing() {
        let mut s = CacheStore::new(2);
        s.insert(entry("a", &[1.0, 0.0], "h", 0)).unwrap();
        assert_eq!(s.invalidate_by_schema("h"), 0);
    }

    #[test]
    fn eviction_removes_oldest() {
        let mut s = CacheStore::new(2).with_max_entries(2);
        s.insert(entry("a", &[1.0, 0.0], "h", 0)).unwrap();
        s.insert(entry("b", &[1.0, 0.0], "h", 1)).unwrap();
        s.insert(entry("c", &[1.0, 0.0], "h", 2)).unwrap();
        let qs: Vec<&str> = s.entries().map(|e| e.question.as_str()).collect();
        assert_eq!(s.len(), 2);
        assert!(!qs.contains(&"a"));
    }

    #[test]
    fn hit_counters() {
        let mut s = CacheStore::new(3);
        let id = s.insert(worked_reference_entry()).unwrap();
        assert!(s.record_hit(&id, Mode::Return));
        assert!(s.record_hit(&id, Mode::Guide));
        assert!(!s.record_hit(&id, Mode::Generate));
        assert!(!s.record_hit(&EntryId::from_raw("nope"), Mode::Return));
        let st = s.stats();
        assert_eq!((st.return_hits_total, st.guide_hits_total), (1, 1));
    }

    #[test]
    fn schema_hash_is_canonical() {
        let a = schema_hash([("items", vec!["b", "a"]), ("stock", vec!["qty"])]);
        let b = schema_hash([("STOCK", vec!["QTY"]), ("Items", vec!["A", "B", "a"])]);
        assert_eq!(a, b);
        let c = schema_hash([("items", vec!["b", "a", "c"]), ("stock", vec!["qty"])]);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }
}
