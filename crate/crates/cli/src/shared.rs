//! Thread-safe stores.
//!
//! [`SharedCache`] wraps a [`CacheStore`] in a read-write lock: searches run
//! concurrently, inserts and hit counters take the write lock. Checkpoint
//! stores accept concurrent writers on distinct ids.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock, RwLockReadGuard, RwLockWriteGuard};

use semcache_core::pipeline::CheckpointError;
use semcache_core::{
    CacheAccess, CacheEntry, CacheError, CacheStore, CheckpointStore, EmbeddingVector, EntryId, Mode,
    PipelineState, ScoredEntry,
};

use crate::error::{Error, Result};
use crate::files::write_atomic;

#[derive(Debug)]
pub struct SharedCache(RwLock<CacheStore>);

impl SharedCache {
    pub fn new(store: CacheStore) -> Self {
        Self(RwLock::new(store))
    }

    // A panic while holding the lock cannot leave the store half-mutated
    // (every mutation is a single map operation), so poisoning is ignored.
    pub fn read(&self) -> RwLockReadGuard<'_, CacheStore> {
        self.0.read().unwrap_or_else(|p| p.into_inner())
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, CacheStore> {
        self.0.write().unwrap_or_else(|p| p.into_inner())
    }

    pub fn into_inner(self) -> CacheStore {
        self.0.into_inner().unwrap_or_else(|p| p.into_inner())
    }
}

impl CacheAccess for SharedCache {
    fn dimension(&self) -> usize {
        self.read().dimension()
    }
    fn top_k(&self, probe: &EmbeddingVector, k: usize) -> Result<Vec<ScoredEntry>, CacheError> {
        self.read().top_k(probe, k)
    }
    fn insert(&self, entry: CacheEntry) -> Result<EntryId, CacheError> {
        self.write().insert(entry)
    }
    fn record_hit(&self, id: &EntryId, mode: Mode) -> bool {
        self.write().record_hit(id, mode)
    }
    fn schema_hash(&self) -> Option<String> {
        self.read().schema_hash().map(ToString::to_string)
    }
    fn next_created_at(&self) -> u64 {
        self.read().next_created_at()
    }
    fn stats(&self) -> semcache_core::StoreStats {
        self.read().stats()
    }
}

/// In-memory checkpoints behind a mutex.
#[derive(Debug, Default)]
pub struct SharedCheckpoints(Mutex<BTreeMap<String, PipelineState>>);

impl SharedCheckpoints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.lock().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl CheckpointStore for SharedCheckpoints {
    fn save(&self, state: &PipelineState) -> Result<(), CheckpointError> {
        self.0
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .insert(state.checkpoint_id.clone(), state.clone());
        Ok(())
    }

    fn load(&self, id: &str) -> Result<PipelineState, CheckpointError> {
        self.0
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| CheckpointError::Unknown(id.to_string()))
    }
}

/// One JSON file per checkpoint id under a directory. Survives the process,
/// which is the point: a killed run resumes from its last file.
#[derive(Debug, Clone)]
pub struct FileCheckpoints {
    dir: PathBuf,
}

impl FileCheckpoints {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, id: &str) -> PathBuf {
        // Ids are `{run_id}:{seq}`; keep file names portable.
        let name: String = id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        self.dir.join(format!("{name}.json"))
    }
}

impl CheckpointStore for FileCheckpoints {
    fn save(&self, state: &PipelineState) -> Result<(), CheckpointError> {
        let path = self.path_of(&state.checkpoint_id);
        write_atomic(&path, |w| serde_json::to_writer(w, state).map_err(std::io::Error::other))
            .map_err(|e| CheckpointError::Storage(e.to_string()))
    }

    fn load(&self, id: &str) -> Result<PipelineState, CheckpointError> {
        let path = self.path_of(id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CheckpointError::Unknown(id.to_string()))
            }
            Err(e) => return Err(CheckpointError::Storage(format!("{}: {e}", path.display()))),
        };
        let state: PipelineState = serde_json::from_str(&text).map_err(|e| CheckpointError::Corrupt {
            id: id.to_string(),
            reason: e.to_string(),
        })?;
        if state.checkpoint_id != id {
            return Err(CheckpointError::Corrupt {
                id: id.to_string(),
                reason: format!("file holds checkpoint {:?}", state.checkpoint_id),
            });
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use semcache_core::cache_store::EntryDraft;
    use semcache_core::QuerySignature;

    fn entry(i: usize) -> CacheEntry {
        CacheEntry::new(EntryDraft {
            question: format!("stock value of ITEM-{i}"),
            signature: QuerySignature::new("stock", "lookup", "none", "value", "item", "INVENTORY_MASTER").unwrap(),
            embedding: EmbeddingVector::new(vec![1.0, i as f32]).unwrap(),
            plan: vec![],
            code: String::new(),
            response: i.to_string(),
            schema_hash: "h".into(),
            created_at: i as u64,
        })
    }

    #[test]
    fn concurrent_inserts_and_searches() {
        let cache = SharedCache::new(CacheStore::new(2).with_schema_hash("h"));
        std::thread::scope(|s| {
            for t in 0..4 {
                let cache = &cache;
                s.spawn(move || {
                    for i in 0..50 {
                        cache.insert(entry(t * 50 + i)).unwrap();
                        let probe = EmbeddingVector::new(vec![1.0, 0.5]).unwrap();
                        assert!(!cache.top_k(&probe, 3).unwrap().is_empty());
                    }
                });
            }
        });
        assert_eq!(cache.stats().entry_count, 200);
    }

    fn state(id: &str) -> PipelineState {
        let mut st = PipelineState::new("r1", "stock value of ITEM-1", None);
        st.checkpoint_id = id.to_string();
        st
    }

    #[test]
    fn file_checkpoints_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileCheckpoints::open(dir.path().join("ck")).unwrap();
        let st = state("r1:003");
        store.save(&st).unwrap();
        assert_eq!(store.load("r1:003").unwrap(), st);
        assert!(matches!(store.load("r1:004"), Err(CheckpointError::Unknown(_))));

        std::fs::write(store.path_of("r1:005"), "{").unwrap();
        assert!(matches!(store.load("r1:005"), Err(CheckpointError::Corrupt { .. })));
        // A file whose content belongs to another id is rejected.
        std::fs::copy(store.path_of("r1:003"), store.path_of("r1:006")).unwrap();
        assert!(matches!(store.load("r1:006"), Err(CheckpointError::Corrupt { .. })));
    }

    #[test]
    fn memory_checkpoints_are_shared() {
        let store = SharedCheckpoints::new();
        std::thread::scope(|s| {
            for i in 0..8 {
                let store = &store;
                s.spawn(move || store.save(&state(&format!("r{i}:000"))).unwrap());
            }
        });
        assert_eq!(store.len(), 8);
        assert!(store.load("r9:000").is_err());
    }
}
