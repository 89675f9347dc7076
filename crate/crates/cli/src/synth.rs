//! Deterministic synthetic workload: a reference corpus, a query log built
//! from it with controlled perturbations, a table-tagged prompt repository
//! and a 17-table schema.
//!
//! The log mixes three kinds of record:
//!
//! - exact duplicates of seeded questions (expected to Return);
//! - paraphrases that keep the seed's template but swap in a fresh item
//!   code and change at most one more token — a plant, a month or a
//!   synonym — so at least three quarters of the content tokens survive
//!   (expected to Guide);
//! - novel questions drawn from vocabulary no seed uses (expected to
//!   Generate).
//!
//! The expectations assume a replay with population off; with population
//! on, later novel questions are guided by earlier generated ones.
//!
//! Repository sizes mimic a production prompt library: a large shared
//! block plus per-table guidance, tuned so an unfiltered prompt pair is
//! about 51k estimator tokens and a query touching one table keeps about
//! 45% of that.

use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semcache_core::lexicon::INVENTORY_TABLES;
use semcache_core::{Audience, Mode, PromptFragment, TableFilter, TableId};

use crate::error::Result;
use crate::files::{write_json, write_jsonl, Fixtures, QueryLogRecord, SchemaFile, SeedRecord, TableSchema};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub corpus_size: usize,
    pub log_size: usize,
    pub duplicate_share: f64,
    pub paraphrase_share: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            corpus_size: 1021,
            log_size: 1000,
            duplicate_share: 0.23,
            paraphrase_share: 0.44,
        }
    }
}

impl SynthConfig {
    /// Target (duplicate, paraphrase, novel) record counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let dup = (self.log_size as f64 * self.duplicate_share).round() as usize;
        let para = (self.log_size as f64 * self.paraphrase_share).round() as usize;
        let dup = dup.min(self.log_size);
        let para = para.min(self.log_size - dup);
        (dup, para, self.log_size - dup - para)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub corpus: Vec<SeedRecord>,
    pub log: Vec<QueryLogRecord>,
    pub fragments: Vec<PromptFragment>,
    pub schema: SchemaFile,
}

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const LOG_FILE: &str = "log.jsonl";
pub const REPO_FILE: &str = "repo.jsonl";
pub const SCHEMA_FILE: &str = "schema.json";
pub const FIXTURES_FILE: &str = "fixtures.json";

impl World {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
        write_jsonl(&dir.join(CORPUS_FILE), &self.corpus)?;
        write_jsonl(&dir.join(LOG_FILE), &self.log)?;
        write_jsonl(&dir.join(REPO_FILE), &self.fragments)?;
        write_json(&dir.join(SCHEMA_FILE), &self.schema)?;
        write_json(&dir.join(FIXTURES_FILE), &Fixtures::new())
    }
}

const PLANTS: [&str; 6] = ["Plant-A", "Plant-B", "Plant-C", "Plant-D", "Plant-E", "Plant-F"];
const LETTERS: &[u8; 26] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Seed templates. `{item}`, `{plant}` and `{month}` are filled per record;
/// every template has at least eight content tokens.
const TEMPLATES: [&str; 8] = [
    "What is the total stock value for item code {item} at {plant} as of {month}?",
    "How many units of item {item} are currently on hand at {plant} today?",
    "Show the aging slab breakdown of stock for item {item} at {plant} by age bucket",
    "What is the average monthly consumption of item {item} at {plant} since {month}?",
    "Total purchase order value for item {item} at {plant} during {month}",
    "Give me the stock worth of item {item} held at {plant} as of {month}",
    "What is the available inventory quantity for item {item} at {plant} right now?",
    "Total issued quantity of item {item} at {plant} each month since {month}",
];

/// In-domain single-word substitutions used by paraphrases.
const SYNONYMS: [(&str, &str); 12] = [
    ("total", "overall"),
    ("Total", "Overall"),
    ("units", "pieces"),
    ("currently", "presently"),
    ("breakdown", "split"),
    ("bucket", "band"),
    ("average", "mean"),
    ("monthly", "periodic"),
    ("held", "kept"),
    ("quantity", "qty"),
    ("today", "now"),
    ("each", "every"),
];

/// Novel templates share no content token with the seed templates.
const NOVEL: [&str; 6] = [
    "Which suppliers have lead times longer than {n} days for vendor {vendor}?",
    "List expiring batches in warehouse bin {bin} before {date}",
    "Reorder point and replenishment lot size for material {mat} under policy {policy}",
    "Goods receipts received from vendor {vendor} last week for material {mat}",
    "UOM conversion factors used by material {mat} in bin {bin}",
    "Supplier delivery delays grouped by carrier for vendor {vendor}",
];

struct Seed {
    template: usize,
    item: String,
    plant: &'static str,
    month: String,
}

fn render(template: &str, item: &str, plant: &str, month: &str) -> String {
    template
        .replace("{item}", item)
        .replace("{plant}", plant)
        .replace("{month}", month)
}

fn item_code(rng: &mut ChaCha8Rng, block: usize, i: usize) -> String {
    format!(
        "ITEM-{:03}-{}{}{}",
        block + i / 26,
        LETTERS[i % 26] as char,
        LETTERS[rng.random_range(0..26)] as char,
        rng.random_range(0..10)
    )
}

fn month(rng: &mut ChaCha8Rng) -> String {
    format!("2024-{:02}", rng.random_range(1..=12))
}

pub fn generate(cfg: &SynthConfig) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let seeds: Vec<Seed> = (0..cfg.corpus_size)
        .map(|i| Seed {
            template: i % TEMPLATES.len(),
            item: item_code(&mut rng, 1, i),
            plant: PLANTS[rng.random_range(0..PLANTS.len())],
            month: month(&mut rng),
        })
        .collect();
    let corpus: Vec<SeedRecord> = seeds
        .iter()
        .enumerate()
        .map(|(i, s)| SeedRecord {
            question: render(TEMPLATES[s.template], &s.item, s.plant, &s.month),
            response: format!(
                "Reference answer {}: {} at {} is {}.{:02}",
                i + 1,
                s.item,
                s.plant,
                rng.random_range(100..100_000),
                rng.random_range(0..100)
            ),
            plan: None,
            code: None,
        })
        .collect();

    let (dup, para, novel) = cfg.counts();
    let mut log = Vec::with_capacity(cfg.log_size);
    if !seeds.is_empty() {
        for _ in 0..dup {
            let i = rng.random_range(0..seeds.len());
            log.push(expect(corpus[i].question.clone(), Mode::Return));
        }
        for j in 0..para {
            let s = &seeds[rng.random_range(0..seeds.len())];
            log.push(expect(paraphrase(&mut rng, s, j), Mode::Guide));
        }
    }
    for j in 0..novel {
        log.push(expect(novel_query(&mut rng, j), Mode::Generate));
    }
    log.shuffle(&mut rng);

    World {
        corpus,
        log,
        fragments: fragments(&mut rng),
        schema: schema(&mut rng),
    }
}

fn expect(query: String, mode: Mode) -> QueryLogRecord {
    QueryLogRecord {
        query,
        expected_mode: Some(mode),
        expected_intent: None,
        fixture_id: None,
    }
}

fn paraphrase(rng: &mut ChaCha8Rng, s: &Seed, j: usize) -> String {
    let item = item_code(rng, 900, j);
    let template = TEMPLATES[s.template];
    match rng.random_range(0..3) {
        0 => render(template, &item, s.plant, &s.month),
        1 => {
            let others: Vec<&str> = PLANTS.iter().copied().filter(|p| *p != s.plant).collect();
            let plant = others.choose(rng).expect("six plants");
            render(template, &item, plant, &s.month)
        }
        _ => {
            let text = render(template, &item, s.plant, &s.month);
            let words: Vec<&str> = text.split(' ').collect();
            let swappable: Vec<usize> = (0..words.len())
                .filter(|&i| SYNONYMS.iter().any(|(from, _)| *from == words[i]))
                .collect();
            match swappable.choose(rng) {
                Some(&i) => {
                    let to = SYNONYMS.iter().find(|(from, _)| *from == words[i]).expect("filtered").1;
                    let mut words = words;
                    words[i] = to;
                    words.join(" ")
                }
                None => text,
            }
        }
    }
}

fn novel_query(rng: &mut ChaCha8Rng, j: usize) -> String {
    let template = NOVEL[j % NOVEL.len()];
    template
        .replace("{n}", &rng.random_range(5..120).to_string())
        .replace("{vendor}", &format!("V-{:05}", 10_000 + j))
        .replace("{bin}", &format!("B{:04}", 1000 + j))
        .replace("{mat}", &format!("MAT-{:05}", 50_000 + j))
        .replace("{policy}", &format!("RP-{}", 300 + j))
        .replace("{date}", &format!("2025-{:02}-{:02}", rng.random_range(1..=12), rng.random_range(1..=28)))
}

// ---------------------------------------------------------------------------
// Prompt repository and schema

/// Shared planner guidance, in estimator tokens.
pub const PLANNER_GLOBAL_TOKENS: usize = 16_000;
pub const CODEGEN_GLOBAL_TOKENS: usize = 5_000;
/// Per-table guidance, summed over that table's fragments.
pub const PLANNER_TABLE_TOKENS: usize = 1_100;
pub const CODEGEN_TABLE_TOKENS: usize = 350;
/// Description and sample-row blocks, each.
pub const TABLE_BLOCK_TOKENS: usize = 75;

const PLANNER_GLOBAL_FRAGMENTS: usize = 14;
const CODEGEN_GLOBAL_FRAGMENTS: usize = 10;
const PLANNER_TABLE_FRAGMENTS: usize = 126;
const CODEGEN_TABLE_FRAGMENTS: usize = 34;

const VERBS: [&str; 8] = ["join", "filter", "aggregate", "validate", "deduplicate", "group", "rank", "reconcile"];
const NOUNS: [&str; 10] = [
    "quantities", "organization ids", "item codes", "posting dates", "unit costs", "currency amounts", "status flags",
    "batch numbers", "period keys", "null values",
];
const CLAUSES: [&str; 8] = [
    "before computing any totals",
    "so that duplicates do not inflate the result",
    "and state the assumption in the plan",
    "using the documented key columns only",
    "unless the question names a specific period",
    "and keep the original column names in the output",
    "then round monetary values to two decimals",
    "because late postings arrive out of order",
];

/// Deterministic prose of exactly `chars` ASCII characters.
fn prose(rng: &mut ChaCha8Rng, topic: &str, chars: usize) -> String {
    let mut s = String::with_capacity(chars + 120);
    while s.len() < chars {
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(&format!(
            "When working with {topic}, {} the {} {}.",
            VERBS.choose(rng).expect("non-empty"),
            NOUNS.choose(rng).expect("non-empty"),
            CLAUSES.choose(rng).expect("non-empty"),
        ));
    }
    s.truncate(chars.saturating_sub(1));
    s.push('.');
    s
}

/// Split `total` into `parts` near-equal sizes.
fn split(total: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| total / parts + usize::from(i < total % parts)).collect()
}

fn fragments(rng: &mut ChaCha8Rng) -> Vec<PromptFragment> {
    let mut out = Vec::new();
    let mut global = |rng: &mut ChaCha8Rng, audience: Audience, tag: &str, n: usize, tokens: usize| {
        for (i, size) in split(tokens * 4, n).into_iter().enumerate() {
            out.push(PromptFragment {
                id: format!("{tag}-global-{i:02}"),
                audience,
                priority: i as i32,
                tables: TableFilter::Global,
                text: prose(rng, "any inventory table", size),
            });
        }
    };
    global(rng, Audience::Planner, "planner", PLANNER_GLOBAL_FRAGMENTS, PLANNER_GLOBAL_TOKENS);
    global(rng, Audience::Codegen, "codegen", CODEGEN_GLOBAL_FRAGMENTS, CODEGEN_GLOBAL_TOKENS);

    let per_table = |rng: &mut ChaCha8Rng, out: &mut Vec<PromptFragment>, audience, tag: &str, n: usize, tokens: usize| {
        let counts = split(n, INVENTORY_TABLES.len());
        for (t, table) in INVENTORY_TABLES.iter().enumerate() {
            for (i, size) in split(tokens * 4, counts[t]).into_iter().enumerate() {
                out.push(PromptFragment {
                    id: format!("{tag}-{}-{i}", table.to_ascii_lowercase()),
                    audience,
                    priority: 100 + (t * 10 + i) as i32,
                    tables: TableFilter::Tables([TableId::new(table).expect("valid table")].into_iter().collect()),
                    text: prose(rng, table, size),
                });
            }
        }
    };
    per_table(rng, &mut out, Audience::Planner, "planner", PLANNER_TABLE_FRAGMENTS, PLANNER_TABLE_TOKENS);
    per_table(rng, &mut out, Audience::Codegen, "codegen", CODEGEN_TABLE_FRAGMENTS, CODEGEN_TABLE_TOKENS);
    out
}

fn columns(table: &str) -> &'static [&'static str] {
    match table {
        "INVENTORY_MASTER" => &["QUANTITY", "STOCK_VALUE", "UNIT_COST"],
        "ITEM_MASTER" => &["DESCRIPTION", "CATEGORY_ID", "UOM"],
        "ORGANIZATION_MASTER" => &["ORGANIZATION_NAME", "REGION"],
        "STOCK_TRANSACTIONS" => &["TRANSACTION_TYPE", "QUANTITY", "TRANSACTION_DATE"],
        "STOCK_AGING" => &["AGE_DAYS", "AGING_SLAB", "QUANTITY"],
        "PURCHASE_ORDERS" => &["PO_NUMBER", "SUPPLIER_ID", "ORDER_DATE", "PO_VALUE"],
        "PO_LINES" => &["PO_NUMBER", "LINE_NUMBER", "QUANTITY", "BACKORDERED"],
        "SUPPLIER_MASTER" => &["SUPPLIER_ID", "SUPPLIER_NAME", "RATING"],
        "GOODS_RECEIPTS" => &["GRN_NUMBER", "RECEIPT_DATE", "QUANTITY"],
        "CONSUMPTION_LOG" => &["ISSUE_DATE", "QUANTITY", "COST_CENTER"],
        "ITEM_PRICES" => &["PRICE", "EFFECTIVE_DATE", "CURRENCY"],
        "CATEGORY_MASTER" => &["CATEGORY_ID", "CATEGORY_NAME"],
        "WAREHOUSE_BINS" => &["BIN_CODE", "ZONE", "CAPACITY"],
        "BATCH_DETAILS" => &["BATCH_NUMBER", "EXPIRY_DATE", "QUANTITY"],
        "REORDER_POLICY" => &["REORDER_POINT", "SAFETY_STOCK", "LOT_SIZE"],
        "LEAD_TIMES" => &["SUPPLIER_ID", "LEAD_TIME_DAYS"],
        "UOM_CONVERSIONS" => &["FROM_UOM", "TO_UOM", "FACTOR"],
        _ => &[],
    }
}

fn schema(rng: &mut ChaCha8Rng) -> SchemaFile {
    let block = TABLE_BLOCK_TOKENS * 4;
    let mut s = SchemaFile::default();
    for table in INVENTORY_TABLES {
        let mut cols = vec!["ITEM_CODE".to_string(), "ORGANIZATION_ID".to_string()];
        cols.extend(columns(table).iter().map(|c| c.to_string()));
        let header = cols.join("|");
        let mut rows = vec![header.clone()];
        let mut len = header.len();
        let mut r = 0;
        while len < block {
            let row: Vec<String> = cols
                .iter()
                .enumerate()
                .map(|(c, _)| match c {
                    0 => format!("ITEM-{:03}-AA{}", 1 + r, r % 10),
                    1 => PLANTS[r % PLANTS.len()].to_string(),
                    _ => rng.random_range(1..10_000).to_string(),
                })
                .collect();
            let row = row.join("|");
            len += row.len() + 1;
            rows.push(row);
            r += 1;
        }
        let description = format!("{table}: one row per item and organization. {}", prose(rng, table, block));
        s.tables.insert(
            table.to_string(),
            TableSchema {
                columns: cols,
                description: description[..block].to_string(),
                sample_rows: rows,
            },
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_shares() {
        assert_eq!(SynthConfig::default().counts(), (230, 440, 330));
        let tiny = SynthConfig {
            log_size: 3,
            ..SynthConfig::default()
        };
        let (d, p, n) = tiny.counts();
        assert_eq!(d + p + n, 3);
    }

    #[test]
    fn prose_has_exact_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 50, 999, 4571] {
            assert_eq!(prose(&mut rng, "ITEM_MASTER", n).len(), n);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = SynthConfig {
            corpus_size: 40,
            log_size: 30,
            ..SynthConfig::default()
        };
        assert_eq!(generate(&cfg), generate(&cfg));
    }

    #[test]
    fn seed_questions_are_unique() {
        let w = generate(&SynthConfig::default());
        let mut qs: Vec<&str> = w.corpus.iter().map(|r| r.question.as_str()).collect();
        qs.sort();
        qs.dedup();
        assert_eq!(qs.len(), 1021);
    }
}
