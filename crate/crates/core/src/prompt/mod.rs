//! Table-tagged prompt repository and intent-driven prompt assembly.
//!
//! Fragments carry the set of tables they apply to (or `GLOBAL`). For a query
//! whose tables were identified upstream, only global fragments and fragments
//! sharing at least one table are assembled, followed by the description and
//! sample-row blocks of those tables.

mod assembly;
mod pattern;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use assembly::{
    assemble, estimate_tokens, AssembledPrompt, CharEstimator, ReductionReport, TableContext, TokenEstimator,
};
pub use pattern::{extract_reference_pattern, Operation, ReferencePattern, TablePattern};

use crate::signature::TableId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("duplicate fragment id {0:?}")]
    DuplicateId(String),
    #[error("fragment {0:?} has empty text")]
    EmptyText(String),
    #[error("unknown tables: {}", .0.join(", "))]
    UnknownTables(Vec<String>),
    #[error("invalid table filter: {0}")]
    BadFilter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Audience {
    Planner,
    Codegen,
}

/// Which tables a fragment applies to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFilter", into = "RawFilter")]
pub enum TableFilter {
    Global,
    Tables(BTreeSet<TableId>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawFilter {
    Keyword(String),
    List(Vec<TableId>),
}

impl TryFrom<RawFilter> for TableFilter {
    type Error = PromptError;
    fn try_from(raw: RawFilter) -> Result<Self, Self::Error> {
        match raw {
            RawFilter::Keyword(k) if k.eq_ignore_ascii_case("global") => Ok(TableFilter::Global),
            RawFilter::Keyword(k) => Err(PromptError::BadFilter(k)),
            RawFilter::List(v) if v.is_empty() => Err(PromptError::BadFilter("empty table list".to_string())),
            RawFilter::List(v) => Ok(TableFilter::Tables(v.into_iter().collect())),
        }
    }
}

impl From<TableFilter> for RawFilter {
    fn from(f: TableFilter) -> Self {
        match f {
            TableFilter::Global => RawFilter::Keyword("GLOBAL".to_string()),
            TableFilter::Tables(t) => RawFilter::List(t.into_iter().collect()),
        }
    }
}

impl TableFilter {
    pub fn admits(&self, tables: &BTreeSet<TableId>) -> bool {
        match self {
            TableFilter::Global => true,
            TableFilter::Tables(own) => own.iter().any(|t| tables.contains(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptFragment {
    pub id: String,
    pub audience: Audience,
    /// Lower sorts earlier.
    pub priority: i32,
    pub tables: TableFilter,
    pub text: String,
}

/// Immutable fragment repository indexed by audience.
#[derive(Debug, Clone)]
pub struct PromptRepository {
    fragments: BTreeMap<Audience, Vec<PromptFragment>>,
    known_tables: BTreeSet<TableId>,
}

impl PromptRepository {
    /// Validate and index fragments. `schema_tables` is the set of tables the
    /// repository may reference and that filters may ask for.
    pub fn new(
        fragments: impl IntoIterator<Item = PromptFragment>,
        schema_tables: impl IntoIterator<Item = TableId>,
    ) -> Result<Self, PromptError> {
        let known_tables: BTreeSet<TableId> = schema_tables.into_iter().collect();
        let mut ids = BTreeSet::new();
        let mut by_audience: BTreeMap<Audience, Vec<PromptFragment>> = BTreeMap::new();
        for f in fragments {
            if !ids.insert(f.id.clone()) {
                return Err(PromptError::DuplicateId(f.id));
            }
            if f.text.trim().is_empty() {
                return Err(PromptError::EmptyText(f.id));
            }
            if let TableFilter::Tables(t) = &f.tables {
                let unknown: Vec<String> = t
                    .iter()
                    .filter(|x| !known_tables.contains(*x))
                    .map(ToString::to_string)
                    .collect();
                if !unknown.is_empty() {
                    return Err(PromptError::UnknownTables(unknown));
                }
            }
            by_audience.entry(f.audience).or_default().push(f);
        }
        for list in by_audience.values_mut() {
            list.sort_by(|a, b| a.priority.cmp(&b.priority).then_with(|| a.id.cmp(&b.id)));
        }
        Ok(Self {
            fragments: by_audience,
            known_tables,
        })
    }

    pub fn len(&self) -> usize {
        self.fragments.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn count(&self, audience: Audience) -> usize {
        self.fragments.get(&audience).map_or(0, Vec::len)
    }

    pub fn known_tables(&self) -> &BTreeSet<TableId> {
        &self.known_tables
    }

    /// All fragments for an audience in `(priority, id)` order.
    pub fn all(&self, audience: Audience) -> &[PromptFragment] {
        self.fragments.get(&audience).map_or(&[], Vec::as_slice)
    }

    /// Fragments that are global or share a table with `tables`, in
    /// `(priority, id)` order.
    pub fn filter_by_tables(
        &self,
        audience: Audience,
        tables: &BTreeSet<TableId>,
    ) -> Result<Vec<&PromptFragment>, PromptError> {
        let unknown: Vec<String> = tables
            .iter()
            .filter(|t| !self.known_tables.contains(*t))
            .map(ToString::to_string)
            .collect();
        if !unknown.is_empty() {
            return Err(PromptError::UnknownTables(unknown));
        }
        Ok(self.all(audience).iter().filter(|f| f.tables.admits(tables)).collect())
    }
}
