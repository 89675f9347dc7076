use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::PromptFragment;
use crate::signature::TableId;

/// Token counting, pluggable so a real tokenizer can replace the default.
pub trait TokenEstimator {
    fn estimate(&self, text: &str) -> usize;
}

/// `ceil(chars / 4)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharEstimator;

impl TokenEstimator for CharEstimator {
    fn estimate(&self, text: &str) -> usize {
        text.chars().count().div_ceil(4)
    }
}

pub fn estimate_tokens(text: &str) -> usize {
    CharEstimator.estimate(text)
}

/// Per-table descriptions and sample rows appended after the fragments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableContext {
    pub descriptions: BTreeMap<TableId, String>,
    pub sample_rows: BTreeMap<TableId, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembledPrompt {
    pub text: String,
    pub fragment_ids: Vec<String>,
    pub token_count: usize,
    pub tables: BTreeSet<TableId>,
}

/// Join fragment texts with blank lines, then the description block of each
/// table in `tables`, then each table's sample-row block. Tables without a
/// description or samples contribute nothing for that block kind.
pub fn assemble(
    fragments: &[&PromptFragment],
    tables: &BTreeSet<TableId>,
    context: &TableContext,
    estimator: &dyn TokenEstimator,
) -> AssembledPrompt {
    let mut parts: Vec<String> = Vec::new();
    let mut fragment_ids: Vec<String> = Vec::new();
    for f in fragments {
        if fragment_ids.contains(&f.id) {
            continue;
        }
        fragment_ids.push(f.id.clone());
        parts.push(f.text.clone());
    }
    let mut used = BTreeSet::new();
    for t in tables {
        if let Some(d) = context.descriptions.get(t) {
            parts.push(format!("## Table {t}\n{d}"));
            used.insert(t.clone());
        }
    }
    for t in tables {
        if let Some(s) = context.sample_rows.get(t) {
            parts.push(format!("## Sample rows {t}\n{s}"));
            used.insert(t.clone());
        }
    }
    let text = parts.join("\n\n");
    AssembledPrompt {
        token_count: estimator.estimate(&text),
        text,
        fragment_ids,
        tables: used,
    }
}

/// Token savings of a filtered prompt against the unfiltered baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub full_tokens: usize,
    pub filtered_tokens: usize,
    pub reduction_pct: f64,
}

impl ReductionReport {
    pub fn new(full_tokens: usize, filtered_tokens: usize) -> Self {
        let reduction_pct = if full_tokens > 0 {
            1.0 - filtered_tokens as f64 / full_tokens as f64
        } else {
            0.0
        };
        Self {
            full_tokens,
            filtered_tokens,
            reduction_pct,
        }
    }

    /// Sum raw counts, then recompute the fraction.
    pub fn combine(&self, other: &ReductionReport) -> Self {
        Self::new(self.full_tokens + other.full_tokens, self.filtered_tokens + other.filtered_tokens)
    }
}
