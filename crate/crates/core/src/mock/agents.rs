use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CallCounter;
use crate::lexicon::{DomainLexicon, FIELD_DATE, FIELD_ITEM_CODE, FIELD_ORGANIZATION};
use crate::matcher::parse_guidance;
use crate::pipeline::{
    AgentError, CodeGenerator, CodegenInput, DataTable, ExecutionResult, Executor, Guard, GuardVerdict,
    InsightsGenerator, InsightsRecord, IntentClassifier, IntentOutput, Metric, Planner, PlannerInput, Relevance,
    Summarizer,
};
use crate::signature::{QuerySignature, TableId};
use crate::text::{contains_phrase, normalize_token, words, Word};

pub const OFF_DOMAIN_GUIDANCE: &str = "I can only help with inventory analytics: stock levels, valuation, aging, \
procurement and consumption. Try asking, for example, \"What is the total stock value at Plant-A?\"";

#[derive(Debug)]
pub struct MockGuard {
    lexicon: DomainLexicon,
    pub calls: CallCounter,
}

impl MockGuard {
    pub fn new(lexicon: DomainLexicon) -> Self {
        Self {
            lexicon,
            calls: CallCounter::default(),
        }
    }
}

impl Guard for MockGuard {
    fn check(&self, query: &str) -> Result<GuardVerdict, AgentError> {
        self.calls.bump();
        Ok(if self.lexicon.is_in_domain(query) {
            GuardVerdict {
                relevance: Relevance::Relevant,
                guidance: None,
            }
        } else {
            GuardVerdict {
                relevance: Relevance::OffDomain,
                guidance: Some(OFF_DOMAIN_GUIDANCE.to_string()),
            }
        })
    }
}

const TREND_TERMS: &[&str] = &["trend", "over time", "monthly", "month over month", "weekly"];
const SUM_TERMS: &[&str] = &["total", "sum"];
const AVG_TERMS: &[&str] = &["average", "mean"];
const COUNT_TERMS: &[&str] = &["how many", "count", "number of"];
const VALUE_TERMS: &[&str] = &["value", "worth", "valuation", "amount", "cost", "spend"];
const AGE_TERMS: &[&str] = &["age", "aging", "ageing", "days", "older than"];
const TIME_TERMS: &[&str] = &[
    "last month", "this month", "last quarter", "this quarter", "this year", "last year", "ytd", "since",
    "between",
];
const THRESHOLD_TERMS: &[&str] = &[
    "above", "below", "more than", "less than", "older than", "exceeding", "greater than", "under",
];

fn any_of(ws: &[Word<'_>], terms: &[&str]) -> bool {
    terms.iter().any(|t| contains_phrase(ws, t))
}

/// Keyword classifier over the lexicon's category, table and flag rules.
#[derive(Debug)]
pub struct MockIntentClassifier {
    lexicon: DomainLexicon,
    pub calls: CallCounter,
}

impl MockIntentClassifier {
    pub fn new(lexicon: DomainLexicon) -> Self {
        Self {
            lexicon,
            calls: CallCounter::default(),
        }
    }

    pub fn signature_of(&self, query: &str) -> Result<IntentOutput, AgentError> {
        let lex = &self.lexicon;
        let ws = words(query);
        let slots = lex.extract_slots(query);
        let has_slot = |f: &str| slots.iter().any(|s| s.field == f);

        let rule = lex
            .categories
            .iter()
            .find(|c| c.terms.iter().any(|t| contains_phrase(&ws, t)));
        let (category, intent, primary) = match rule {
            Some(r) => (r.category.as_str(), r.intent.as_str(), r.primary_table.as_str()),
            None => ("general", "lookup", lex.default_primary_table.as_str()),
        };

        let ranking = lex.flag_rules.iter().any(|g| g.name == "ranking" && any_of_owned(&ws, &g.terms));
        let aggregation = if any_of(&ws, SUM_TERMS) {
            "sum"
        } else if any_of(&ws, AVG_TERMS) {
            "avg"
        } else if any_of(&ws, COUNT_TERMS) {
            "count"
        } else {
            "none"
        };
        let query_type = if any_of(&ws, TREND_TERMS) {
            "trend"
        } else if aggregation != "none" {
            "analytical"
        } else if ranking {
            "ranking"
        } else {
            "lookup"
        };
        let metric = if any_of(&ws, VALUE_TERMS) {
            "value"
        } else if any_of(&ws, COUNT_TERMS) {
            "count"
        } else if any_of(&ws, AGE_TERMS) {
            "age"
        } else {
            "quantity"
        };
        let grouping = ws
            .windows(2)
            .find(|p| {
                (p[0].lower == "by" || p[0].lower == "per")
                    && !lex.is_stopword(&p[1].lower)
                    && lex.extract_slots(p[1].text).is_empty()
            })
            .map(|p| normalize_token(&p[1].lower))
            .unwrap_or_else(|| if has_slot(FIELD_ITEM_CODE) { "item".into() } else { "none".into() });

        let mut filters: Vec<&str> = Vec::new();
        if has_slot(FIELD_ITEM_CODE) {
            filters.push("item_code");
        }
        if has_slot(FIELD_ORGANIZATION) {
            filters.push("location");
        }
        if has_slot(FIELD_DATE) || any_of(&ws, TIME_TERMS) {
            filters.push("time_period");
        }
        if any_of(&ws, &["category", "categories"]) {
            filters.push("category");
        }
        if any_of(&ws, THRESHOLD_TERMS) {
            filters.push("threshold");
        }

        let primary_id = TableId::new(primary).map_err(|e| AgentError::new(e.to_string()))?;
        let mut joins: Vec<&str> = Vec::new();
        for r in &lex.table_rules {
            if r.table != primary_id.as_str() && !joins.contains(&r.table.as_str()) && any_of_owned(&ws, &r.terms) {
                joins.push(&r.table);
            }
        }
        let flags: Vec<&str> = lex
            .flag_rules
            .iter()
            .filter(|g| any_of_owned(&ws, &g.terms))
            .map(|g| g.name.as_str())
            .collect();

        let signature = QuerySignature::new(category, query_type, aggregation, metric, &grouping, primary)
            .and_then(|s| s.with_filters(filters))
            .and_then(|s| s.with_joins(joins))
            .and_then(|s| s.with_flags(flags))
            .map_err(|e| AgentError::new(e.to_string()))?;
        let tables: BTreeSet<TableId> = signature.table_set().into_iter().cloned().collect();
        Ok(IntentOutput {
            intent: intent.to_string(),
            tables,
            signature,
        })
    }
}

fn any_of_owned(ws: &[Word<'_>], terms: &[String]) -> bool {
    terms.iter().any(|t| contains_phrase(ws, t))
}

impl IntentClassifier for MockIntentClassifier {
    fn classify(&self, query: &str) -> Result<IntentOutput, AgentError> {
        self.calls.bump();
        self.signature_of(query)
    }
}

fn metric_column(metric: &str) -> &'static str {
    match metric {
        "value" => "STOCK_VALUE",
        "count" => "ITEM_CODE",
        "age" => "AGE_DAYS",
        _ => "QUANTITY",
    }
}

/// Plans from reference guidance when given one, otherwise from the
/// signature and the query's value slots.
#[derive(Debug)]
pub struct MockPlanner {
    lexicon: DomainLexicon,
    pub calls: CallCounter,
}

impl MockPlanner {
    pub fn new(lexicon: DomainLexicon) -> Self {
        Self {
            lexicon,
            calls: CallCounter::default(),
        }
    }

    /// Reference plan with `[field]` placeholders filled from the hints.
    /// The i-th placeholder of a field takes the field's i-th hint, the
    /// last hint once they run out.
    pub fn adapt(guidance: &str) -> Option<Vec<String>> {
        let parsed = parse_guidance(guidance).ok()?;
        let mut by_field: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for h in &parsed.adaptations {
            by_field.entry(h.field.as_str()).or_default().push(h.current_value.as_str());
        }
        let mut used: BTreeMap<&str, usize> = BTreeMap::new();
        let steps = parsed
            .plan
            .iter()
            .map(|step| {
                let mut s = step.clone();
                for (field, values) in &by_field {
                    let ph = format!("[{field}]");
                    while let Some(pos) = s.find(&ph) {
                        let n = used.entry(field).or_insert(0);
                        let v = values[(*n).min(values.len() - 1)];
                        *n += 1;
                        s.replace_range(pos..pos + ph.len(), v);
                    }
                }
                s
            })
            .collect();
        Some(steps)
    }

    pub fn scratch(&self, query: &str, sig: &QuerySignature) -> Vec<String> {
        let mut steps = vec![format!("Load {} table", sig.primary_table)];
        for j in &sig.required_joins {
            steps.push(format!("Join {j} on ITEM_CODE"));
        }
        for slot in self.lexicon.extract_slots(query) {
            steps.push(match slot.field {
                FIELD_ITEM_CODE => format!("Filter by ITEM_CODE = '{}'", slot.value),
                FIELD_ORGANIZATION => format!("Filter by ORGANIZATION = '{}'", slot.value),
                _ => format!("Filter by DATE >= '{}'", slot.value),
            });
        }
        let grouping = sig.grouping.as_str();
        if grouping != "none" && grouping != "item" {
            steps.push(format!("Group by {}", grouping.to_ascii_uppercase()));
        }
        let col = metric_column(sig.primary_metric.as_str());
        steps.push(match sig.aggregation.as_str() {
            "sum" => format!("Calculate sum of {col}"),
            "avg" => format!("Calculate average of {col}"),
            "count" => "Count rows".to_string(),
            _ => format!("Select {col}"),
        });
        steps.push(
            if sig.primary_metric.as_str() == "value" {
                "Format as currency output"
            } else {
                "Format as table output"
            }
            .to_string(),
        );
        steps
    }
}

impl Planner for MockPlanner {
    fn plan(&self, input: &PlannerInput<'_>) -> Result<Vec<String>, AgentError> {
        self.calls.bump();
        if let Some(steps) = input.guidance.and_then(Self::adapt) {
            return Ok(steps);
        }
        Ok(self.scratch(input.query, input.signature))
    }
}

/// Translates plan steps line by line into pandas-flavoured code with a
/// `# fixture:` / `# attempt:` header the mock executor keys on.
#[derive(Debug, Default)]
pub struct MockCodeGenerator {
    pub calls: CallCounter,
}

fn quoted(step: &str) -> Option<&str> {
    let start = step.find('\'')? + 1;
    let len = step[start..].find('\'')?;
    Some(&step[start..start + len])
}

pub(crate) fn translate_step(step: &str) -> String {
    let word = |i: usize| step.split_whitespace().nth(i).unwrap_or_default();
    if step.starts_with("Load ") {
        format!("df = pd.read_csv(\"{}.csv\")", word(1))
    } else if step.starts_with("Join ") {
        format!("df = df.merge(pd.read_csv(\"{}.csv\"), on=\"{}\")", word(1), word(3))
    } else if step.starts_with("Filter by ") {
        let op = if step.contains(">=") { ">=" } else { "==" };
        format!("df = df[df[\"{}\"] {op} \"{}\"]", word(2), quoted(step).unwrap_or_default())
    } else if step.starts_with("Group by ") {
        format!("df = df.groupby(\"{}\")", word(2))
    } else if step.starts_with("Calculate sum of ") {
        format!("result = df[\"{}\"].sum()", word(3))
    } else if step.starts_with("Calculate average of ") {
        format!("result = df[\"{}\"].mean()", word(3))
    } else if step == "Count rows" {
        "result = df.count()".to_string()
    } else if step.starts_with("Select ") {
        format!("result = df[\"{}\"]", word(1))
    } else if step.starts_with("Format as ") {
        "print(result)".to_string()
    } else {
        format!("# step: {step}")
    }
}

impl CodeGenerator for MockCodeGenerator {
    fn generate(&self, input: &CodegenInput<'_>) -> Result<String, AgentError> {
        self.calls.bump();
        let mut code = format!(
            "# fixture: {}\n# attempt: {}\n",
            input.fixture_id.unwrap_or("-"),
            input.attempt
        );
        if let Some(first) = input.feedback.and_then(|f| f.lines().find(|l| l.starts_with("Error: "))) {
            code.push_str(&format!("# retry after: {}\n", &first[7..]));
        }
        code.push_str("import pandas as pd\n");
        for step in input.plan {
            code.push_str(&translate_step(step));
            code.push('\n');
        }
        Ok(code)
    }
}

/// Scripted result for one execution attempt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "message", rename_all = "snake_case")]
pub enum ScriptedOutcome {
    Ok,
    Error(String),
    Timeout(String),
}

/// Stateless executor: reads the `# fixture:` and `# attempt:` header of the
/// code and plays the scripted outcome for that attempt. Unscripted attempts
/// succeed with a value derived from the code body, so identical code always
/// yields identical output.
#[derive(Debug, Default)]
pub struct MockExecutor {
    scripts: BTreeMap<String, Vec<ScriptedOutcome>>,
    pub calls: CallCounter,
}

impl MockExecutor {
    pub fn new(scripts: BTreeMap<String, Vec<ScriptedOutcome>>) -> Self {
        Self {
            scripts,
            calls: CallCounter::default(),
        }
    }

    pub fn script(mut self, fixture_id: impl Into<String>, outcomes: Vec<ScriptedOutcome>) -> Self {
        self.scripts.insert(fixture_id.into(), outcomes);
        self
    }

    pub fn has_fixture(&self, fixture_id: &str) -> bool {
        self.scripts.contains_key(fixture_id)
    }

    fn header<'c>(code: &'c str, key: &str) -> Option<&'c str> {
        code.lines().find_map(|l| l.strip_prefix(key)).map(str::trim)
    }

    /// Deterministic success output for a code body.
    pub fn default_output(code: &str) -> ExecutionResult {
        let body: String = code
            .lines()
            .filter(|l| !l.starts_with('#'))
            .flat_map(|l| [l, "\n"])
            .collect();
        let digest = Sha256::digest(body.as_bytes());
        let mut n = [0u8; 8];
        n.copy_from_slice(&digest[..8]);
        let cents = u64::from_le_bytes(n) % 100_000_000;
        let value = format!("{}.{:02}", cents / 100, cents % 100);
        ExecutionResult::ok(
            vec![DataTable {
                columns: vec!["metric".into(), "value".into()],
                rows: vec![vec!["result".into(), value.clone()]],
            }],
            format!("result = {value}"),
        )
    }
}

impl Executor for MockExecutor {
    fn execute(&self, code: &str) -> Result<ExecutionResult, AgentError> {
        self.calls.bump();
        let fixture = Self::header(code, "# fixture:").unwrap_or("-");
        let attempt: usize = Self::header(code, "# attempt:")
            .and_then(|a| a.parse().ok())
            .unwrap_or(0);
        match self.scripts.get(fixture).and_then(|s| s.get(attempt)) {
            Some(ScriptedOutcome::Error(m)) => Ok(ExecutionResult::error(m.clone())),
            Some(ScriptedOutcome::Timeout(m)) => Ok(ExecutionResult::timeout(m.clone())),
            Some(ScriptedOutcome::Ok) | None => Ok(Self::default_output(code)),
        }
    }
}

#[derive(Debug, Default)]
pub struct MockSummarizer {
    pub calls: CallCounter,
}

impl Summarizer for MockSummarizer {
    fn summarize(&self, _query: &str, result: &ExecutionResult) -> Result<String, AgentError> {
        self.calls.bump();
        Ok(format!("Answer: {}", result.text_out))
    }
}

/// Emits one metric per numeric table cell and nothing it cannot read off
/// the execution result.
#[derive(Debug, Default)]
pub struct MockInsights {
    pub calls: CallCounter,
}

impl InsightsGenerator for MockInsights {
    fn insights(&self, _query: &str, result: &ExecutionResult) -> Result<InsightsRecord, AgentError> {
        self.calls.bump();
        let mut rec = InsightsRecord::default();
        for table in &result.tables_out {
            for row in &table.rows {
                let name = row.first().cloned().unwrap_or_default();
                for cell in row.iter().skip(1) {
                    if cell.parse::<f64>().is_ok() {
                        rec.metrics.push(Metric {
                            name: name.clone(),
                            value: cell.clone(),
                        });
                        rec.insights.push(format!("{name} is {cell}"));
                        rec.recommendations.push(format!("Review {name} against its target level."));
                        rec.followups.push(format!("How has {name} changed over the last quarter?"));
                    }
                }
            }
        }
        Ok(rec)
    }
}
