//! Structural query signatures.
//!
//! A [`QuerySignature`] decomposes an analytics question into five levels
//! (category, query type + aggregation, metric + grouping, filter types,
//! table pattern) plus a set of free-form semantic flags. Signatures render
//! to a canonical pipe-delimited similarity key and are compared with a
//! weighted per-component score.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::text::{normalize_table, normalize_token};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignatureError {
    #[error("{field} is empty after normalization")]
    Empty { field: &'static str },
    #[error("{field} contains reserved separator in {value:?}")]
    ReservedChar { field: &'static str, value: String },
    #[error("primary table {0} also listed in required joins")]
    PrimaryInJoins(String),
    #[error("join table {0} listed more than once")]
    DuplicateJoin(String),
    #[error("weight {name} is negative or not finite: {value}")]
    BadWeight { name: &'static str, value: f64 },
    #[error("weights sum to {0}, expected 1.0")]
    WeightSum(f64),
}

fn check_reserved(field: &'static str, value: &str) -> Result<(), SignatureError> {
    if value.is_empty() {
        return Err(SignatureError::Empty { field });
    }
    if value.contains(['|', '+']) {
        return Err(SignatureError::ReservedChar {
            field,
            value: value.to_string(),
        });
    }
    Ok(())
}

/// A normalized lowercase token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(raw: &str) -> Result<Self, SignatureError> {
        let norm = normalize_token(raw);
        check_reserved("token", &norm)?;
        Ok(Self(norm))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = SignatureError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(&value)
    }
}

impl From<Token> for String {
    fn from(t: Token) -> Self {
        t.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A table identifier, canonicalized to uppercase so comparisons are
/// case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TableId(String);

impl TableId {
    pub fn new(raw: &str) -> Result<Self, SignatureError> {
        let norm = normalize_table(raw);
        check_reserved("table", &norm)?;
        Ok(Self(norm))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TableId {
    type Error = SignatureError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(&value)
    }
}

impl From<TableId> for String {
    fn from(t: TableId) -> Self {
        t.0
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Five-level structural decomposition of a query plus semantic flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSignature")]
pub struct QuerySignature {
    pub semantic_category: Token,
    pub query_type: Token,
    pub aggregation: Token,
    pub primary_metric: Token,
    pub grouping: Token,
    pub filter_types: BTreeSet<Token>,
    pub primary_table: TableId,
    pub required_joins: Vec<TableId>,
    pub semantic_flags: BTreeSet<Token>,
}

#[derive(Deserialize)]
struct RawSignature {
    semantic_category: Token,
    query_type: Token,
    aggregation: Token,
    primary_metric: Token,
    grouping: Token,
    #[serde(default)]
    filter_types: BTreeSet<Token>,
    primary_table: TableId,
    #[serde(default)]
    required_joins: Vec<TableId>,
    #[serde(default)]
    semantic_flags: BTreeSet<Token>,
}

impl TryFrom<RawSignature> for QuerySignature {
    type Error = SignatureError;
    fn try_from(raw: RawSignature) -> Result<Self, Self::Error> {
        let sig = QuerySignature {
            semantic_category: raw.semantic_category,
            query_type: raw.query_type,
            aggregation: raw.aggregation,
            primary_metric: raw.primary_metric,
            grouping: raw.grouping,
            filter_types: raw.filter_types,
            primary_table: raw.primary_table,
            required_joins: raw.required_joins,
            semantic_flags: raw.semantic_flags,
        };
        sig.validate()?;
        Ok(sig)
    }
}

impl QuerySignature {
    /// Builds a signature with the scalar levels set, the given primary table,
    /// no filters, joins or flags.
    pub fn new(
        category: &str,
        query_type: &str,
        aggregation: &str,
        metric: &str,
        grouping: &str,
        primary_table: &str,
    ) -> Result<Self, SignatureError> {
        Ok(Self {
            semantic_category: Token::new(category)?,
            query_type: Token::new(query_type)?,
            aggregation: Token::new(aggregation)?,
            primary_metric: Token::new(metric)?,
            grouping: Token::new(grouping)?,
            filter_types: BTreeSet::new(),
            primary_table: TableId::new(primary_table)?,
            required_joins: Vec::new(),
            semantic_flags: BTreeSet::new(),
        })
    }

    pub fn with_filters<'a>(
        mut self,
        filters: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, SignatureError> {
        for f in filters {
            self.filter_types.insert(Token::new(f)?);
        }
        Ok(self)
    }

    pub fn with_joins<'a>(
        mut self,
        joins: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, SignatureError> {
        for j in joins {
            self.required_joins.push(TableId::new(j)?);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn with_flags<'a>(
        mut self,
        flags: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, SignatureError> {
        for f in flags {
            self.semantic_flags.insert(Token::new(f)?);
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SignatureError> {
        let mut seen = BTreeSet::new();
        for j in &self.required_joins {
            if *j == self.primary_table {
                return Err(SignatureError::PrimaryInJoins(j.to_string()));
            }
            if !seen.insert(j) {
                return Err(SignatureError::DuplicateJoin(j.to_string()));
            }
        }
        Ok(())
    }

    /// `{primary_table} ∪ required_joins`.
    pub fn table_set(&self) -> BTreeSet<&TableId> {
        let mut set: BTreeSet<&TableId> = self.required_joins.iter().collect();
        set.insert(&self.primary_table);
        set
    }

    pub fn similarity_key(&self) -> String {
        build_similarity_key(self)
    }
}

/// Render the canonical `L1|L2|L3|L4|L5` key.
///
/// L2 is `querytype_aggregation`, L3 is `metric_grouping`, L4 is the sorted
/// filter tokens joined by `+`, L5 is the primary table followed by the
/// joins in order, joined by `+`.
pub fn build_similarity_key(sig: &QuerySignature) -> String {
    let mut key = String::new();
    key.push_str(sig.semantic_category.as_str());
    key.push('|');
    key.push_str(sig.query_type.as_str());
    key.push('_');
    key.push_str(sig.aggregation.as_str());
    key.push('|');
    key.push_str(sig.primary_metric.as_str());
    key.push('_');
    key.push_str(sig.grouping.as_str());
    key.push('|');
    for (i, f) in sig.filter_types.iter().enumerate() {
        if i > 0 {
            key.push('+');
        }
        key.push_str(f.as_str());
    }
    key.push('|');
    key.push_str(sig.primary_table.as_str());
    for j in &sig.required_joins {
        key.push('+');
        key.push_str(j.as_str());
    }
    key
}

/// Component weights for [`structural_similarity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    pub category: f64,
    pub operation: f64,
    pub metric: f64,
    pub grouping: f64,
    pub tables: f64,
    pub flags: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        Self {
            category: 0.25,
            operation: 0.20,
            metric: 0.15,
            grouping: 0.15,
            tables: 0.15,
            flags: 0.10,
        }
    }
}

impl SimilarityWeights {
    pub fn new(
        category: f64,
        operation: f64,
        metric: f64,
        grouping: f64,
        tables: f64,
        flags: f64,
    ) -> Result<Self, SignatureError> {
        let w = Self {
            category,
            operation,
            metric,
            grouping,
            tables,
            flags,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.category,
            self.operation,
            self.metric,
            self.grouping,
            self.tables,
            self.flags,
        ]
    }

    pub fn validate(&self) -> Result<(), SignatureError> {
        const NAMES: [&str; 6] = ["category", "operation", "metric", "grouping", "tables", "flags"];
        let arr = self.as_array();
        for (name, value) in NAMES.iter().zip(arr) {
            if !value.is_finite() || value < 0.0 {
                return Err(SignatureError::BadWeight { name, value });
            }
        }
        let sum: f64 = arr.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SignatureError::WeightSum(sum));
        }
        Ok(())
    }
}

/// Jaccard index with `J(∅, ∅) = 1`.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Per-component match scores in weight order:
/// category, operation, metric, grouping, tables, flags.
pub fn component_matches(a: &QuerySignature, b: &QuerySignature) -> [f64; 6] {
    let crisp = |eq: bool| if eq { 1.0 } else { 0.0 };
    [
        crisp(a.semantic_category == b.semantic_category),
        crisp(a.query_type == b.query_type && a.aggregation == b.aggregation),
        crisp(a.primary_metric == b.primary_metric),
        crisp(a.grouping == b.grouping),
        jaccard(&a.table_set(), &b.table_set()),
        jaccard(&a.semantic_flags, &b.semantic_flags),
    ]
}

/// Weighted structural similarity `Σ w_i · match_i` in `[0, 1]`.
///
/// Scalar levels match by exact normalized equality; the table set and the
/// semantic flags score their Jaccard index.
pub fn structural_similarity(a: &QuerySignature, b: &QuerySignature, w: &SimilarityWeights) -> f64 {
    let m = component_matches(a, b);
    let score: f64 = w.as_array().iter().zip(m).map(|(w, m)| w * m).sum();
    score.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> QuerySignature {
        QuerySignature::new("valuation", "analytical", "sum", "value", "item", "INVENTORY_MASTER")
            .unwrap()
            .with_filters(["location", "item_code"])
            .unwrap()
    }

    #[test]
    fn worked_example_key() {
        assert_eq!(
            build_similarity_key(&reference()),
            "valuation|analytical_sum|value_item|item_code+location|INVENTORY_MASTER"
        );
    }

    #[test]
    fn key_independent_of_filter_order() {
        let a = reference();
        let b = QuerySignature::new("valuation", "analytical", "sum", "value", "item", "inventory_master")
            .unwrap()
            .with_filters(["item_code", "location"])
            .unwrap();
        assert_eq!(build_similarity_key(&a), build_similarity_key(&b));
    }

    #[test]
    fn key_renders_joins_in_order() {
        let sig = QuerySignature::new("procurement", "lookup", "none", "quantity", "none", "PURCHASE_ORDERS")
            .unwrap()
            .with_joins(["PO_LINES", "SUPPLIER_MASTER"])
            .unwrap();
        assert_eq!(
            sig.similarity_key(),
            "procurement|lookup_none|quantity_none||PURCHASE_ORDERS+PO_LINES+SUPPLIER_MASTER"
        );
    }

    #[test]
    fn primary_table_cannot_be_joined() {
        let err = QuerySignature::new("stock", "lookup", "none", "quantity", "none", "A")
            .unwrap()
            .with_joins(["a"])
            .unwrap_err();
        assert_eq!(err, SignatureError::PrimaryInJoins("A".into()));
    }

    #[test]
    fn tokens_reject_separators_and_empties() {
        assert!(Token::new("a|b").is_err());
        assert!(Token::new("a+b").is_err());
        assert!(Token::new("   ").is_err());
        assert_eq!(Token::new(" Time Period").unwrap().as_str(), "time_period");
    }

    #[test]
    fn identical_signatures_score_one() {
        let w = SimilarityWeights::default();
        assert_eq!(structural_similarity(&reference(), &reference(), &w), 1.0);
    }

    #[test]
    fn disjoint_flags_score_point_nine() {
        let w = SimilarityWeights::default();
        let a = reference().with_flags(["comparative"]).unwrap();
        let b = reference().with_flags(["per_unit"]).unwrap();
        assert!((structural_similarity(&a, &b, &w) - 0.90).abs() < 1e-12);
    }

    #[test]
    fn category_only_difference_scores_point_seven_five() {
        let w = SimilarityWeights::default();
        let mut b = reference();
        b.semantic_category = Token::new("stock").unwrap();
        assert!((structural_similarity(&reference(), &b, &w) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn default_weights_sum_to_one() {
        let sum: f64 = SimilarityWeights::default().as_array().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(SimilarityWeights::default().validate().is_ok());
        assert!(SimilarityWeights::new(0.5, 0.5, 0.1, 0.0, 0.0, 0.0).is_err());
        assert!(SimilarityWeights::new(1.1, -0.1, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn jaccard_of_empty_sets_is_one() {
        let e: BTreeSet<u8> = BTreeSet::new();
        assert_eq!(jaccard(&e, &e), 1.0);
        let a: BTreeSet<u8> = [1, 2].into_iter().collect();
        let b: BTreeSet<u8> = [2, 3].into_iter().collect();
        assert!((jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn serde_rejects_invalid_signature() {
        let json = r#"{"semantic_category":"stock","query_type":"lookup","aggregation":"none",
            "primary_metric":"quantity","grouping":"none","primary_table":"A","required_joins":["A"]}"#;
        assert!(serde_json::from_str::<QuerySignature>(json).is_err());
        let ok = serde_json::to_string(&reference()).unwrap();
        assert_eq!(serde_json::from_str::<QuerySignature>(&ok).unwrap(), reference());
    }
}
