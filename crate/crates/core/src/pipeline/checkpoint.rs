use alloc::collections::BTreeMap;
use alloc::string::String;
use core::cell::RefCell;

use super::PipelineState;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckpointError {
    #[error("unknown checkpoint {0:?}")]
    Unknown(String),
    #[error("checkpoint storage failed: {0}")]
    Storage(String),
    #[error("checkpoint {id:?} is corrupt: {reason}")]
    Corrupt { id: String, reason: String },
}

/// Id-addressed state snapshots. Implementations must tolerate concurrent
/// writers as long as they use distinct ids.
pub trait CheckpointStore {
    fn save(&self, state: &PipelineState) -> Result<(), CheckpointError>;
    fn load(&self, id: &str) -> Result<PipelineState, CheckpointError>;
}

/// Single-threaded in-memory store.
#[derive(Debug, Default)]
pub struct MemoryCheckpoints {
    states: RefCell<BTreeMap<String, PipelineState>>,
}

impl MemoryCheckpoints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.states.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> alloc::vec::Vec<String> {
        self.states.borrow().keys().cloned().collect()
    }
}

impl CheckpointStore for MemoryCheckpoints {
    fn save(&self, state: &PipelineState) -> Result<(), CheckpointError> {
        self.states
            .borrow_mut()
            .insert(state.checkpoint_id.clone(), state.clone());
        Ok(())
    }

    fn load(&self, id: &str) -> Result<PipelineState, CheckpointError> {
        self.states
            .borrow()
            .get(id)
            .cloned()
            .ok_or_else(|| CheckpointError::Unknown(id.into()))
    }
}
