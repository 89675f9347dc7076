use serde::{Deserialize, Serialize};

use crate::lexicon::{DomainLexicon, TermGroup};
use crate::text::{contains_phrase, words, Word};

/// Per-source boost increments. Each source fires at most once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostIncrements {
    pub location_norm: f64,
    pub category_variation: f64,
    pub structural_pattern: f64,
    pub key_phrase: f64,
}

impl BoostIncrements {
    pub const DEFAULT_INCREMENT: f64 = 0.02;

    pub fn uniform(increment: f64) -> Self {
        Self {
            location_norm: increment,
            category_variation: increment,
            structural_pattern: increment,
            key_phrase: increment,
        }
    }
}

impl Default for BoostIncrements {
    fn default() -> Self {
        Self::uniform(Self::DEFAULT_INCREMENT)
    }
}

/// Contribution of each boost source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoostBreakdown {
    pub location_norm: f64,
    pub category_variation: f64,
    pub structural_pattern: f64,
    pub key_phrase: f64,
}

impl BoostBreakdown {
    pub fn total(&self) -> f64 {
        self.location_norm + self.category_variation + self.structural_pattern + self.key_phrase
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

fn shared_group(groups: &[TermGroup], a: &[Word<'_>], b: &[Word<'_>]) -> bool {
    groups.iter().any(|g| {
        g.terms.iter().any(|t| contains_phrase(a, t)) && g.terms.iter().any(|t| contains_phrase(b, t))
    })
}

/// Domain boosts between two query texts.
///
/// - location normalization: both mention a known location and the texts are
///   equal once locations are masked;
/// - category variation: both use a term from the same synonym group;
/// - structural pattern: both match the same question template;
/// - key phrase: both contain the same domain key phrase.
pub fn compute_boost(
    query_a: &str,
    query_b: &str,
    lexicon: &DomainLexicon,
    increments: &BoostIncrements,
) -> BoostBreakdown {
    let wa = words(query_a);
    let wb = words(query_b);
    let mentions_location = |ws: &[Word<'_>]| ws.iter().any(|w| lexicon.is_location(w.text));

    let location = mentions_location(&wa)
        && mentions_location(&wb)
        && lexicon.mask_locations(query_a) == lexicon.mask_locations(query_b);
    let category = shared_group(&lexicon.category_synonyms, &wa, &wb);
    let structure = shared_group(&lexicon.structural_templates, &wa, &wb);
    let phrase = lexicon
        .key_phrases
        .iter()
        .any(|p| contains_phrase(&wa, p) && contains_phrase(&wb, p));

    let pick = |fired: bool, inc: f64| if fired { inc } else { 0.0 };
    BoostBreakdown {
        location_norm: pick(location, increments.location_norm),
        category_variation: pick(category, increments.category_variation),
        structural_pattern: pick(structure, increments.structural_pattern),
        key_phrase: pick(phrase, increments.key_phrase),
    }
}
