//! Files, locking and the command-line harness around `semcache-core`.
//!
//! - [`files`]: JSONL cache persistence, prompt repositories, schemas,
//!   seed corpora, query logs and executor fixtures.
//! - [`shared`]: a lock-guarded cache and checkpoint stores usable across
//!   threads.
//! - [`seed`]: embed, sign and insert a reference corpus.
//! - [`replay`]: run a query log through the pipeline with mock agents.
//! - [`report`]: aggregate per-record traces into a [`ReplayReport`].
//! - [`synth`]: the deterministic synthetic workload used by acceptance.

pub mod error;
pub mod files;
pub mod replay;
pub mod report;
pub mod seed;
pub mod shared;
pub mod synth;

pub use error::{Error, Result};
pub use replay::{replay, ReplayConfig, ReplayInputs, ReplayOutput};
pub use report::{ReplayReport, RouteLabel, TraceRecord};
pub use seed::seed_store;
pub use shared::{FileCheckpoints, SharedCache, SharedCheckpoints};

use semcache_core::mock::MockAgents;
use semcache_core::DomainLexicon;

/// The mock roster over the bundled inventory lexicon.
pub fn mock_agents(dimension: usize) -> MockAgents {
    MockAgents::new(&DomainLexicon::inventory(), dimension)
}
