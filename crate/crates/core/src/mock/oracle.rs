use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::CallCounter;
use crate::cache_store::CacheEntry;
use crate::lexicon::{DomainLexicon, Slot};
use crate::matcher::{AdaptationHint, EquivalenceOracle, EquivalenceQuery, EquivalenceVerdict, MatchError};

/// Rule-based equivalence judge.
///
/// Scanning candidates in order:
/// - identical slot-masked text, identical signature and identical slot
///   values → `matched`, no adaptations;
/// - otherwise the first candidate whose similarity key equals the query's
///   is adaptable: the i-th occurrence of each slot field in the reference is
///   paired with the i-th occurrence in the query, and differing values
///   become adaptation hints;
/// - otherwise no match.
#[derive(Debug)]
pub struct MockEquivalenceOracle {
    lexicon: DomainLexicon,
    pub calls: CallCounter,
}

impl MockEquivalenceOracle {
    pub const CONFIDENCE: f64 = 0.95;

    pub fn new(lexicon: DomainLexicon) -> Self {
        Self {
            lexicon,
            calls: CallCounter::default(),
        }
    }

    /// Field-level differences between a reference and the current query.
    pub fn adaptations(&self, reference: &str, current: &str) -> Vec<AdaptationHint> {
        let group = |slots: Vec<Slot>| {
            let mut order: Vec<&'static str> = Vec::new();
            let mut by_field: BTreeMap<&'static str, Vec<_>> = BTreeMap::new();
            for s in slots {
                if !order.contains(&s.field) {
                    order.push(s.field);
                }
                by_field.entry(s.field).or_default().push(s.value);
            }
            (order, by_field)
        };
        let (order, reference) = group(self.lexicon.extract_slots(reference));
        let (_, current) = group(self.lexicon.extract_slots(current));
        let mut hints = Vec::new();
        for field in order {
            let (Some(rs), Some(cs)) = (reference.get(field), current.get(field)) else {
                continue;
            };
            for (r, c) in rs.iter().zip(cs) {
                if r != c {
                    hints.push(AdaptationHint {
                        field: field.to_string(),
                        reference_value: r.clone(),
                        current_value: c.clone(),
                    });
                }
            }
        }
        hints
    }
}

impl EquivalenceOracle for MockEquivalenceOracle {
    fn check(&self, query: EquivalenceQuery<'_>, candidates: &[&CacheEntry]) -> Result<EquivalenceVerdict, MatchError> {
        self.calls.bump();
        let masked = self.lexicon.mask_slots(query.text);
        let values = |t: &str| -> Vec<_> { self.lexicon.extract_slots(t).into_iter().map(|s| s.value).collect() };
        let query_values = values(query.text);
        for (i, c) in candidates.iter().enumerate() {
            if c.signature == *query.signature
                && self.lexicon.mask_slots(&c.question) == masked
                && values(&c.question) == query_values
            {
                return Ok(EquivalenceVerdict {
                    matched: true,
                    matched_index: Some(i),
                    adaptations: Vec::new(),
                    confidence: Some(Self::CONFIDENCE),
                });
            }
        }
        let key = query.signature.similarity_key();
        if let Some(i) = candidates.iter().position(|c| c.similarity_key == key) {
            return Ok(EquivalenceVerdict {
                matched: false,
                matched_index: Some(i),
                adaptations: self.adaptations(&candidates[i].question, query.text),
                confidence: Some(Self::CONFIDENCE),
            });
        }
        Ok(EquivalenceVerdict::no_match())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache_store::tests::{worked_reference_entry, worked_signature};

    const CURRENT: &str = "What is the total stock value for item code ITEM-001-NN0 at Plant-B?";

    #[test]
    fn worked_adaptations() {
        let o = MockEquivalenceOracle::new(DomainLexicon::inventory());
        let e = worked_reference_entry();
        let sig = worked_signature();
        let v = o
            .check(EquivalenceQuery { text: CURRENT, signature: &sig }, &[&e])
            .unwrap();
        assert!(!v.matched);
        assert_eq!(v.matched_index, Some(0));
        let got: Vec<(&str, &str, &str)> = v
            .adaptations
            .iter()
            .map(|h| (h.field.as_str(), h.reference_value.as_str(), h.current_value.as_str()))
            .collect();
        assert_eq!(
            got,
            [
                ("item_code", "ITEM-001-BB0", "ITEM-001-NN0"),
                ("organization", "Plant-A", "Plant-B")
            ]
        );
        v.validate(1).unwrap();
    }

    #[test]
    fn identical_question_is_matched() {
        let o = MockEquivalenceOracle::new(DomainLexicon::inventory());
        let e = worked_reference_entry();
        let sig = worked_signature();
        let v = o
            .check(EquivalenceQuery { text: &e.question, signature: &sig }, &[&e])
            .unwrap();
        assert!(v.matched);
        assert!(v.adaptations.is_empty());
    }

    #[test]
    fn different_key_is_no_match() {
        let o = MockEquivalenceOracle::new(DomainLexicon::inventory());
        let e = worked_reference_entry();
        let sig = crate::signature::QuerySignature::new("aging", "lookup", "none", "age", "none", "STOCK_AGING").unwrap();
        let v = o
            .check(EquivalenceQuery { text: "aging slabs", signature: &sig }, &[&e])
            .unwrap();
        assert_eq!(v, EquivalenceVerdict::no_match());
    }
}
