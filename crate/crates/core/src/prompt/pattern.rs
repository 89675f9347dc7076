//! Compact reference patterns extracted from cached analysis code.
//!
//! Extraction is lexical: comments are stripped, then call and subscript
//! markers are located. Only the five operation kinds below are reported,
//! each once, in order of first appearance.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::signature::TableId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    LoadData,
    JoinTables,
    Filter,
    Aggregate,
    Visualize,
}

impl Operation {
    pub fn as_str(self) -> &'static str {
        match self {
            Operation::LoadData => "load_data",
            Operation::JoinTables => "join_tables",
            Operation::Filter => "filter",
            Operation::Aggregate => "aggregate",
            Operation::Visualize => "visualize",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TablePattern {
    pub primary: Option<TableId>,
    pub joins: Vec<TableId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferencePattern {
    pub operations: Vec<Operation>,
    pub join_keys: Vec<String>,
    pub table_pattern: TablePattern,
}

impl ReferencePattern {
    pub fn is_empty(&self) -> bool {
        self.operations.is_empty()
    }

    /// Text form injected into code-generation prompts.
    pub fn render(&self) -> String {
        let ops: Vec<&str> = self.operations.iter().map(|o| o.as_str()).collect();
        let mut tables = Vec::new();
        if let Some(p) = &self.table_pattern.primary {
            tables.push(p.as_str());
        }
        tables.extend(self.table_pattern.joins.iter().map(TableId::as_str));
        format!(
            "operations: {}\njoin_keys: {}\ntables: {}",
            ops.join(" > "),
            self.join_keys.join(", "),
            tables.join(" + ")
        )
    }
}

const LOAD_MARKERS: &[&str] = &[
    "read_csv(",
    "read_excel(",
    "read_parquet(",
    "read_sql(",
    "read_table(",
    "load_table(",
    "load_data(",
];
const JOIN_MARKERS: &[&str] = &[".merge(", "merge(", ".join("];
const FILTER_MARKERS: &[&str] = &[".query(", ".isin(", ".between("];
const AGG_MARKERS: &[&str] = &[
    ".groupby(",
    ".sum(",
    ".mean(",
    ".count(",
    ".agg(",
    ".aggregate(",
    ".size(",
    ".nunique(",
    ".pivot_table(",
];
const VIS_MARKERS: &[&str] = &["plt.", ".plot(", "sns.", "px.", ".bar(", ".hist(", "savefig("];

/// Remove `#` comments that are not inside string literals.
fn strip_comments(code: &str) -> String {
    let mut out = String::with_capacity(code.len());
    for line in code.lines() {
        let mut quote: Option<char> = None;
        let mut prev = '\0';
        for c in line.chars() {
            match quote {
                Some(q) if c == q && prev != '\\' => quote = None,
                Some(_) => {}
                None if c == '"' || c == '\'' => quote = Some(c),
                None if c == '#' => break,
                None => {}
            }
            out.push(c);
            prev = c;
        }
        out.push('\n');
    }
    out
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Occurrences of `marker` that start on an identifier boundary. Markers that
/// begin with `.` must follow an expression (not a string literal).
fn find_marker(code: &str, marker: &str) -> Vec<usize> {
    code.match_indices(marker)
        .filter(|(pos, _)| {
            let before = code[..*pos].chars().next_back();
            if marker.starts_with('.') {
                before.is_some_and(|c| is_ident(c) || c == ')' || c == ']')
            } else {
                !before.is_some_and(is_ident)
            }
        })
        .map(|(pos, _)| pos)
        .collect()
}

/// Byte range of the balanced `(...)` or `[...]` group opening at `open`.
fn balanced(code: &str, open: usize) -> Option<&str> {
    let bytes = code.as_bytes();
    let (o, c) = match bytes.get(open)? {
        b'(' => (b'(', b')'),
        b'[' => (b'[', b']'),
        _ => return None,
    };
    let mut depth = 0usize;
    let mut quote: Option<u8> = None;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if b == o => depth += 1,
            None if b == c => {
                depth -= 1;
                if depth == 0 {
                    return Some(&code[open + 1..i]);
                }
            }
            None => {}
        }
    }
    None
}

/// String literals in `s`, in order.
fn string_literals(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = s;
    while let Some(start) = rest.find(['"', '\'']) {
        let q = rest.as_bytes()[start] as char;
        let body = &rest[start + 1..];
        match body.find(q) {
            Some(end) => {
                out.push(&body[..end]);
                rest = &body[end + 1..];
            }
            None => break,
        }
    }
    out
}

fn table_from_literal(lit: &str) -> Option<TableId> {
    let lit = lit.trim();
    let name = if lit.contains(char::is_whitespace) {
        // SQL text: take the identifier after FROM
        let upper = lit.to_ascii_uppercase();
        let idx = upper.find(" FROM ")?;
        lit[idx + 6..].split(|c: char| !is_ident(c)).next()?
    } else {
        let file = lit.rsplit(['/', '\\']).next()?;
        file.split('.').next()?
    };
    TableId::new(name).ok()
}

fn join_keys_in(args: &str) -> Vec<String> {
    let mut keys = Vec::new();
    for kw in ["left_on=", "right_on=", "on="] {
        for (pos, _) in args.match_indices(kw) {
            if args[..pos].chars().next_back().is_some_and(is_ident) {
                continue;
            }
            let value = args[pos + kw.len()..].trim_start();
            let lits = if value.starts_with('[') {
                balanced(value, 0).map(string_literals).unwrap_or_default()
            } else {
                string_literals(value).into_iter().take(1).collect()
            };
            keys.extend(lits.into_iter().map(ToString::to_string));
        }
    }
    keys
}

fn subscript_filters(code: &str) -> Option<usize> {
    const OPS: [&str; 6] = ["==", "!=", ">=", "<=", ">", "<"];
    code.match_indices('[').find_map(|(pos, _)| {
        let inner = balanced(code, pos)?;
        let stripped: String = {
            let mut s = String::new();
            let mut rest = inner;
            for lit in string_literals(inner) {
                if let Some(i) = rest.find(lit) {
                    s.push_str(&rest[..i]);
                    rest = &rest[i + lit.len()..];
                }
            }
            s.push_str(rest);
            s
        };
        OPS.iter().any(|op| stripped.contains(op)).then_some(pos)
    })
}

pub fn extract_reference_pattern(code: &str) -> ReferencePattern {
    let code = strip_comments(code);
    let first = |markers: &[&str]| markers.iter().flat_map(|m| find_marker(&code, m)).min();

    let mut found: Vec<(usize, Operation)> = Vec::new();
    let mut push = |pos: Option<usize>, op| {
        if let Some(p) = pos {
            found.push((p, op));
        }
    };
    push(first(LOAD_MARKERS), Operation::LoadData);
    push(first(JOIN_MARKERS), Operation::JoinTables);
    push(
        [first(FILTER_MARKERS), subscript_filters(&code)].into_iter().flatten().min(),
        Operation::Filter,
    );
    push(first(AGG_MARKERS), Operation::Aggregate);
    push(first(VIS_MARKERS), Operation::Visualize);
    found.sort();

    let mut loads: Vec<(usize, TableId)> = LOAD_MARKERS
        .iter()
        .flat_map(|m| {
            let code = &code;
            find_marker(code, m).into_iter().filter_map(move |pos| {
                let open = pos + m.len() - 1;
                let args = balanced(code, open)?;
                let lit = string_literals(args).into_iter().next()?;
                Some((pos, table_from_literal(lit)?))
            })
        })
        .collect();
    loads.sort();
    let mut tables: Vec<TableId> = Vec::new();
    for (_, t) in loads {
        if !tables.contains(&t) {
            tables.push(t);
        }
    }

    let mut join_positions: Vec<usize> = JOIN_MARKERS.iter().flat_map(|m| find_marker(&code, m)).collect();
    join_positions.sort();
    join_positions.dedup();
    let mut join_keys: Vec<String> = Vec::new();
    let mut seen_calls: Vec<usize> = Vec::new();
    for pos in join_positions {
        let Some(open) = code[pos..].find('(').map(|o| pos + o) else { continue };
        if seen_calls.contains(&open) {
            continue;
        }
        seen_calls.push(open);
        if let Some(args) = balanced(&code, open) {
            for k in join_keys_in(args) {
                if !join_keys.contains(&k) {
                    join_keys.push(k);
                }
            }
        }
    }

    let mut tables = tables.into_iter();
    ReferencePattern {
        operations: found.into_iter().map(|(_, op)| op).collect(),
        join_keys,
        table_pattern: TablePattern {
            primary: tables.next(),
            joins: tables.collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCRIPT: &str = r#"
import pandas as pd
# load both tables
inv = pd.read_csv("data/INVENTORY_MASTER.csv")
prices = pd.read_csv("data/ITEM_PRICES.csv")
df = inv.merge(prices, on="ITEM_CODE", how="left")
df = df[df["ORGANIZATION"] == "Plant-A"]
total = df["STOCK_VALUE"].sum()
print(total)
"#;

    #[test]
    fn load_merge_filter_sum() {
        let p = extract_reference_pattern(SCRIPT);
        assert_eq!(
            p.operations,
            [Operation::LoadData, Operation::JoinTables, Operation::Filter, Operation::Aggregate]
        );
        assert_eq!(p.join_keys, ["ITEM_CODE"]);
        assert_eq!(p.table_pattern.primary.as_ref().unwrap().as_str(), "INVENTORY_MASTER");
        assert_eq!(p.table_pattern.joins[0].as_str(), "ITEM_PRICES");
    }

    #[test]
    fn comments_only_yield_nothing() {
        let p = extract_reference_pattern("# df.groupby('x').sum()\n# plt.show()\n");
        assert!(p.is_empty());
        assert_eq!(p, ReferencePattern::default());
    }

    #[test]
    fn string_join_is_not_a_table_join() {
        let p = extract_reference_pattern("names = ', '.join(items)\n");
        assert!(!p.operations.contains(&Operation::JoinTables));
    }

    #[test]
    fn multi_key_merge_and_plot() {
        let code = "a = load_table('STOCK_AGING')\nb = load_table('ITEM_MASTER')\nm = pd.merge(a, b, left_on=['ITEM', 'ORG'], right_on=['ITEM_CODE', 'ORG'])\nm.plot(kind='bar')\n";
        let p = extract_reference_pattern(code);
        assert_eq!(p.operations, [Operation::LoadData, Operation::JoinTables, Operation::Visualize]);
        assert_eq!(p.join_keys, ["ITEM", "ORG", "ITEM_CODE"]);
    }

    #[test]
    fn render_is_compact() {
        let p = extract_reference_pattern(SCRIPT);
        assert_eq!(
            p.render(),
            "operations: load_data > join_tables > filter > aggregate\njoin_keys: ITEM_CODE\ntables: INVENTORY_MASTER + ITEM_PRICES"
        );
    }

    #[test]
    fn sql_literal_table() {
        let p = extract_reference_pattern("df = pd.read_sql(\"SELECT * FROM PO_LINES WHERE x = 1\", conn)\n");
        assert_eq!(p.table_pattern.primary.unwrap().as_str(), "PO_LINES");
    }
}
