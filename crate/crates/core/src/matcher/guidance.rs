//! Reference guidance block injected into the planner in Guide mode.
//!
//! ```text
//! === REFERENCE GUIDANCE ===
//! Similar question found (similarity: 0.89)
//!
//! Required Adaptations:
//! - item_code: ITEM-001-BB0 -> ITEM-001-NN0
//!
//! Reference Plan:
//! 1. Load INVENTORY_MASTER table
//! 2. Filter by ITEM_CODE = '[item_code]'
//! ```
//!
//! The adaptations section is omitted when there are no hints. Every line,
//! including the last, ends with `\n`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{AdaptationHint, MatchError};
use crate::cache_store::CacheEntry;
use crate::text::replace_word;

pub const GUIDANCE_HEADER: &str = "=== REFERENCE GUIDANCE ===";
const SIMILARITY_PREFIX: &str = "Similar question found (similarity: ";
const ADAPTATIONS_HEADER: &str = "Required Adaptations:";
const PLAN_HEADER: &str = "Reference Plan:";

/// Plan step with each adapted reference value replaced by `[field]`.
pub fn placeholder_step(step: &str, adaptations: &[AdaptationHint]) -> String {
    adaptations.iter().fold(step.to_string(), |acc, hint| {
        replace_word(&acc, &hint.reference_value, &format!("[{}]", hint.field))
    })
}

pub fn format_guidance(entry: &CacheEntry, adaptations: &[AdaptationHint], similarity: f64) -> String {
    let mut out = String::new();
    out.push_str(GUIDANCE_HEADER);
    out.push('\n');
    out.push_str(&format!("{SIMILARITY_PREFIX}{similarity:.2})\n"));
    out.push('\n');
    if !adaptations.is_empty() {
        out.push_str(ADAPTATIONS_HEADER);
        out.push('\n');
        for h in adaptations {
            out.push_str(&format!("- {}: {} -> {}\n", h.field, h.reference_value, h.current_value));
        }
        out.push('\n');
    }
    out.push_str(PLAN_HEADER);
    out.push('\n');
    for (i, step) in entry.plan.iter().enumerate() {
        out.push_str(&format!("{}. {}\n", i + 1, placeholder_step(step, adaptations)));
    }
    out
}

/// Structured content recovered from a guidance block.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedGuidance {
    /// Similarity as displayed (two decimals).
    pub similarity: String,
    pub adaptations: Vec<AdaptationHint>,
    pub plan: Vec<String>,
}

fn malformed(line: usize, why: &str) -> MatchError {
    MatchError::MalformedGuidance {
        line,
        reason: why.to_string(),
    }
}

pub fn parse_guidance(text: &str) -> Result<ParsedGuidance, MatchError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    let next = |i: &mut usize| {
        let l = lines.get(*i).copied();
        *i += 1;
        l
    };
    if next(&mut i) != Some(GUIDANCE_HEADER) {
        return Err(malformed(1, "missing header"));
    }
    let sim_line = next(&mut i).ok_or_else(|| malformed(2, "missing similarity line"))?;
    let similarity = sim_line
        .strip_prefix(SIMILARITY_PREFIX)
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| malformed(2, "bad similarity line"))?
        .to_string();
    if next(&mut i) != Some("") {
        return Err(malformed(3, "expected blank line"));
    }

    let mut adaptations = Vec::new();
    let mut section = next(&mut i);
    if section == Some(ADAPTATIONS_HEADER) {
        loop {
            let n = i + 1;
            match next(&mut i) {
                Some("") => break,
                Some(l) => {
                    let body = l.strip_prefix("- ").ok_or_else(|| malformed(n, "expected '- '"))?;
                    let (field, rest) = body.split_once(": ").ok_or_else(|| malformed(n, "missing ': '"))?;
                    let (old, new) = rest.split_once(" -> ").ok_or_else(|| malformed(n, "missing ' -> '"))?;
                    adaptations.push(AdaptationHint {
                        field: field.to_string(),
                        reference_value: old.to_string(),
                        current_value: new.to_string(),
                    });
                }
                None => return Err(malformed(n, "unterminated adaptations section")),
            }
        }
        section = next(&mut i);
    }
    if section != Some(PLAN_HEADER) {
        return Err(malformed(i, "missing plan header"));
    }
    let mut plan = Vec::new();
    while let Some(l) = next(&mut i) {
        let want = format!("{}. ", plan.len() + 1);
        let step = l.strip_prefix(want.as_str()).ok_or_else(|| malformed(i, "bad plan step numbering"))?;
        plan.push(step.to_string());
    }
    Ok(ParsedGuidance {
        similarity,
        adaptations,
        plan,
    })
}
