//! Domain lexicon: location identifiers, item-code patterns, category synonym
//! groups, structural templates, key phrases and table vocabulary.
//!
//! The lexicon drives the similarity boosts, value-slot recognition for
//! adaptation hints, and the deterministic mock agents.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::text::{contains_phrase, words};

/// Named group of interchangeable terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermGroup {
    pub name: String,
    pub terms: Vec<String>,
}

/// Category rule for the mock intent classifier: the first rule whose terms
/// occur in a query decides its semantic category and primary table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRule {
    pub category: String,
    pub intent: String,
    pub primary_table: String,
    pub terms: Vec<String>,
}

/// Maps vocabulary onto a table that the query must join.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRule {
    pub table: String,
    pub terms: Vec<String>,
}

/// A recognized literal value in a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub field: &'static str,
    pub value: String,
    /// Word index in the query.
    pub position: usize,
}

pub const FIELD_ITEM_CODE: &str = "item_code";
pub const FIELD_ORGANIZATION: &str = "organization";
pub const FIELD_DATE: &str = "date";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainLexicon {
    /// Location identifiers, matched case-insensitively as whole words.
    pub locations: Vec<String>,
    /// Prefixes that mark an item code (`ITEM-` matches `ITEM-001-BB0`).
    pub item_code_prefixes: Vec<String>,
    pub category_synonyms: Vec<TermGroup>,
    pub structural_templates: Vec<TermGroup>,
    pub key_phrases: Vec<String>,
    /// Extra vocabulary that marks a query as in-domain for the guard.
    pub domain_terms: Vec<String>,
    pub categories: Vec<CategoryRule>,
    pub default_primary_table: String,
    pub table_rules: Vec<TableRule>,
    pub flag_rules: Vec<TermGroup>,
    pub stopwords: Vec<String>,
}

fn strs(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| (*s).to_owned()).collect()
}

fn group(name: &str, terms: &[&str]) -> TermGroup {
    TermGroup {
        name: name.to_owned(),
        terms: strs(terms),
    }
}

fn category(category: &str, intent: &str, table: &str, terms: &[&str]) -> CategoryRule {
    CategoryRule {
        category: category.to_owned(),
        intent: intent.to_owned(),
        primary_table: table.to_owned(),
        terms: strs(terms),
    }
}

fn table(table: &str, terms: &[&str]) -> TableRule {
    TableRule {
        table: table.to_owned(),
        terms: strs(terms),
    }
}

/// The 17 tables of the bundled inventory schema.
pub const INVENTORY_TABLES: [&str; 17] = [
    "INVENTORY_MASTER",
    "ITEM_MASTER",
    "ORGANIZATION_MASTER",
    "STOCK_TRANSACTIONS",
    "STOCK_AGING",
    "PURCHASE_ORDERS",
    "PO_LINES",
    "SUPPLIER_MASTER",
    "GOODS_RECEIPTS",
    "CONSUMPTION_LOG",
    "ITEM_PRICES",
    "CATEGORY_MASTER",
    "WAREHOUSE_BINS",
    "BATCH_DETAILS",
    "REORDER_POLICY",
    "LEAD_TIMES",
    "UOM_CONVERSIONS",
];

impl DomainLexicon {
    /// Lexicon for the bundled enterprise-inventory domain.
    pub fn inventory() -> Self {
        Self {
            locations: strs(&["Plant-A", "Plant-B", "Plant-C", "Plant-D", "Plant-E", "Plant-F"]),
            item_code_prefixes: strs(&["ITEM-"]),
            category_synonyms: vec![
                group("valuation", &["valuation", "value", "worth"]),
                group("stock", &["stock", "inventory", "on hand", "available"]),
                group("aging", &["aging", "ageing", "age", "slab"]),
                group("procurement", &["procurement", "purchase", "purchased", "buying"]),
                group("consumption", &["consumption", "consumed", "usage", "issued"]),
            ],
            structural_templates: vec![
                group("total_of", &["what is the total", "show me total", "give me the total", "total"]),
                group("count_of", &["how many", "number of", "count of"]),
                group("average_of", &["average", "mean"]),
                group("list_of", &["list", "show all", "which items"]),
                group("trend_of", &["trend", "over time", "month over month"]),
            ],
            key_phrases: strs(&[
                "stock value",
                "total stock",
                "on hand",
                "aging slab",
                "purchase order",
                "consumption rate",
                "item code",
            ]),
            domain_terms: strs(&[
                "item", "items", "sku", "material", "plant", "quantity", "qty", "supplier", "vendor",
                "lead time", "reorder", "batch", "expiry", "shelf life", "warehouse", "bin", "receipt",
                "receipts", "uom", "spare", "part", "parts", "lot", "lots", "replenishment",
                "safety stock", "backorder", "backorders",
            ]),
            categories: vec![
                category("valuation", "valuation", "INVENTORY_MASTER", &["valuation", "value", "worth"]),
                category("aging", "aging", "STOCK_AGING", &["aging", "ageing", "age", "slab", "older than"]),
                category(
                    "procurement",
                    "procurement",
                    "PURCHASE_ORDERS",
                    &["procurement", "purchase", "purchased", "purchase order", "buying"],
                ),
                category(
                    "consumption",
                    "consumption",
                    "CONSUMPTION_LOG",
                    &["consumption", "consumed", "usage", "issued"],
                ),
                category("stock", "stock_current", "INVENTORY_MASTER", &["stock", "inventory", "on hand", "available"]),
            ],
            default_primary_table: "ITEM_MASTER".to_owned(),
            table_rules: vec![
                table("SUPPLIER_MASTER", &["supplier", "suppliers", "vendor", "vendors"]),
                table("ITEM_PRICES", &["price", "prices", "unit cost"]),
                table("CATEGORY_MASTER", &["category", "categories"]),
                table("GOODS_RECEIPTS", &["receipt", "receipts", "grn", "received"]),
                table("LEAD_TIMES", &["lead time", "lead times"]),
                table("BATCH_DETAILS", &["batch", "batches", "expiry", "shelf life", "lot", "lots"]),
                table("WAREHOUSE_BINS", &["bin", "bins", "warehouse"]),
                table("REORDER_POLICY", &["reorder", "safety stock", "replenishment"]),
                table("PO_LINES", &["line", "lines", "po lines", "backorder", "backorders"]),
                table("STOCK_TRANSACTIONS", &["transaction", "transactions", "movement", "movements"]),
                table("UOM_CONVERSIONS", &["uom", "unit of measure"]),
                table("ITEM_MASTER", &["description", "descriptions", "spare", "part", "parts"]),
            ],
            flag_rules: vec![
                group("comparative", &["compare", "comparison", "versus", "vs"]),
                group("per_unit", &["per unit", "unit cost"]),
                group("ranking", &["top", "highest", "lowest", "bottom"]),
            ],
            stopwords: strs(&[
                "a", "an", "the", "is", "are", "was", "what", "whats", "me", "show", "give", "for",
                "at", "of", "in", "on", "to", "by", "and", "or", "with", "please", "tell", "can",
                "you", "i", "do", "does", "we", "our", "us", "all", "from", "which", "there", "be",
                "s", "it", "this", "that", "into", "across", "per",
            ]),
        }
    }

    pub fn is_location(&self, word: &str) -> bool {
        self.locations.iter().any(|l| l.eq_ignore_ascii_case(word))
    }

    pub fn is_item_code(&self, word: &str) -> bool {
        self.item_code_prefixes.iter().any(|p| {
            word.len() > p.len()
                && word.is_char_boundary(p.len())
                && word[..p.len()].eq_ignore_ascii_case(p)
                && word[p.len()..].chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
        })
    }

    pub fn is_stopword(&self, word_lower: &str) -> bool {
        self.stopwords.iter().any(|s| s == word_lower)
    }

    /// Recognize literal value slots (item codes, locations, ISO dates).
    pub fn extract_slots(&self, text: &str) -> Vec<Slot> {
        words(text)
            .iter()
            .enumerate()
            .filter_map(|(position, w)| {
                self.slot_field(w.text).map(|field| Slot {
                    field,
                    value: w.text.to_owned(),
                    position,
                })
            })
            .collect()
    }

    fn slot_field(&self, word: &str) -> Option<&'static str> {
        if self.is_item_code(word) {
            Some(FIELD_ITEM_CODE)
        } else if self.is_location(word) {
            Some(FIELD_ORGANIZATION)
        } else if is_iso_date(word) {
            Some(FIELD_DATE)
        } else {
            None
        }
    }

    /// Lowercased text with every value slot replaced by `<field>`.
    pub fn mask_slots(&self, text: &str) -> String {
        self.mask_with(text, |w| self.slot_field(w))
    }

    /// Lowercased text with only location identifiers masked.
    pub fn mask_locations(&self, text: &str) -> String {
        self.mask_with(text, |w| self.is_location(w).then_some(FIELD_ORGANIZATION))
    }

    fn mask_with(&self, text: &str, field_of: impl Fn(&str) -> Option<&'static str>) -> String {
        let mut out = String::new();
        for (i, w) in words(text).iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            match field_of(w.text) {
                Some(field) => {
                    out.push('<');
                    out.push_str(field);
                    out.push('>');
                }
                None => out.push_str(&w.lower),
            }
        }
        out
    }

    /// Whether the query mentions any in-domain vocabulary.
    pub fn is_in_domain(&self, text: &str) -> bool {
        let ws = words(text);
        if ws.iter().any(|w| self.slot_field(w.text).is_some()) {
            return true;
        }
        let any = |terms: &[String]| terms.iter().any(|t| contains_phrase(&ws, t));
        self.categories.iter().any(|c| any(&c.terms))
            || self.table_rules.iter().any(|t| any(&t.terms))
            || any(&self.domain_terms)
            || any(&self.key_phrases)
    }
}

impl Default for DomainLexicon {
    fn default() -> Self {
        Self::inventory()
    }
}

fn is_iso_date(word: &str) -> bool {
    let b = word.as_bytes();
    let digits = |r: core::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    match b.len() {
        10 => digits(0..4) && b[4] == b'-' && digits(5..7) && b[7] == b'-' && digits(8..10),
        7 => digits(0..4) && b[4] == b'-' && digits(5..7),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_in_worked_example() {
        let lex = DomainLexicon::inventory();
        let slots = lex.extract_slots("What is the total stock value for item code ITEM-001-BB0 at Plant-A?");
        let pairs: Vec<(&str, &str)> = slots.iter().map(|s| (s.field, s.value.as_str())).collect();
        assert_eq!(pairs, [("item_code", "ITEM-001-BB0"), ("organization", "Plant-A")]);
    }

    #[test]
    fn dates_are_slots() {
        let lex = DomainLexicon::inventory();
        let slots = lex.extract_slots("consumption since 2024-03-01 and 2024-04");
        assert_eq!(slots.len(), 2);
        assert!(slots.iter().all(|s| s.field == FIELD_DATE));
        assert!(!is_iso_date("2024-3-01"));
    }

    #[test]
    fn masking() {
        let lex = DomainLexicon::inventory();
        assert_eq!(
            lex.mask_slots("Stock of ITEM-9 at plant-b?"),
            "stock of <item_code> at <organization>"
        );
        assert_eq!(lex.mask_locations("Stock of ITEM-9 at plant-b"), "stock of item-9 at <organization>");
    }

    #[test]
    fn item_code_needs_suffix() {
        let lex = DomainLexicon::inventory();
        assert!(lex.is_item_code("item-001-nn0"));
        assert!(!lex.is_item_code("ITEM-"));
        assert!(!lex.is_item_code("ITEMS"));
    }

    #[test]
    fn guard_vocabulary() {
        let lex = DomainLexicon::inventory();
        assert!(!lex.is_in_domain("What's the weather?"));
        assert!(lex.is_in_domain("total stock at Plant-C"));
        assert!(lex.is_in_domain("lead time for supplier Acme"));
    }

    #[test]
    fn schema_has_seventeen_tables() {
        let set: alloc::collections::BTreeSet<&str> = INVENTORY_TABLES.iter().copied().collect();
        assert_eq!(set.len(), 17);
        let lex = DomainLexicon::inventory();
        for r in &lex.table_rules {
            assert!(set.contains(r.table.as_str()), "{}", r.table);
        }
        for c in &lex.categories {
            assert!(set.contains(c.primary_table.as_str()));
        }
    }
}
