//! On-disk formats.
//!
//! Everything is line-delimited JSON except the schema and the executor
//! fixtures, which are single JSON documents. The cache file starts with a
//! header line naming the format version, the embedding dimension and the
//! schema hash the entries were built against:
//!
//! ```text
//! {"format":"semcache","version":1,"dimension":384,"schema_hash":"…"}
//! {"id":"…","question":"…", …}
//! ```
//!
//! Writes go to a sibling temp file and are renamed into place, so a reader
//! never sees a half-written cache.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use semcache_core::mock::ScriptedOutcome;
use semcache_core::{
    schema_hash, CacheEntry, CacheStore, EntryId, Mode, PromptFragment, PromptRepository, TableContext,
    TableId,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CACHE_FORMAT: &str = "semcache";
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: String,
    pub version: u32,
    pub dimension: usize,
    #[serde(default)]
    pub schema_hash: Option<String>,
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Parse every non-blank line of `path`, reporting the 1-based line number
/// of the first bad one.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_jsonl_checked(path, |_: &T| Ok(()))
}

/// [`read_jsonl`] with a per-record check whose message is reported at the
/// record's line.
pub fn read_jsonl_checked<T: DeserializeOwned>(
    path: &Path,
    check: impl Fn(&T) -> std::result::Result<(), String>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e))?;
        check(&record).map_err(|m| Error::parse(path, i + 1, m))?;
        out.push(record);
    }
    Ok(out)
}

/// Write `lines` atomically, one JSON value per line.
pub fn write_jsonl<T: Serialize>(path: &Path, lines: impl IntoIterator<Item = T>) -> Result<()> {
    write_atomic(path, |w| {
        for line in lines {
            serde_json::to_writer(&mut *w, &line).map_err(std::io::Error::other)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
        w.write_all(b"\n")
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e))
}

pub(crate) fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    let run = || -> std::io::Result<()> {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        body(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    };
    run().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

// ---------------------------------------------------------------------------
// Cache

pub fn save_cache(store: &CacheStore, path: &Path) -> Result<()> {
    let header = CacheHeader {
        format: CACHE_FORMAT.to_string(),
        version: CACHE_VERSION,
        dimension: store.dimension(),
        schema_hash: store.schema_hash().map(ToString::to_string),
    };
    write_atomic(path, |w| {
        serde_json::to_writer(&mut *w, &header).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
        for entry in store.entries() {
            serde_json::to_writer(&mut *w, entry).map_err(std::io::Error::other)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn load_cache(path: &Path) -> Result<CacheStore> {
    let mut lines = open(path)?.lines().enumerate();
    let header: CacheHeader = loop {
        match lines.next() {
            None => return Err(Error::parse(path, 1, "missing cache header")),
            Some((i, line)) => {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e))?;
            }
        }
    };
    if header.format != CACHE_FORMAT {
        return Err(Error::parse(path, 1, format!("not a cache file (format {:?})", header.format)));
    }
    if header.version != CACHE_VERSION {
        return Err(Error::parse(
            path,
            1,
            format!("unsupported cache version {} (expected {CACHE_VERSION})", header.version),
        ));
    }
    let mut store = CacheStore::new(header.dimension);
    if let Some(h) = header.schema_hash {
        store.set_schema_hash(h);
    }
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: CacheEntry = serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e))?;
        if entry.id != EntryId::derive(&entry.question, &entry.schema_hash) {
            return Err(Error::parse(path, i + 1, format!("entry id {} does not match its question", entry.id)));
        }
        store.insert(entry).map_err(|e| Error::parse(path, i + 1, e))?;
    }
    Ok(store)
}

// ---------------------------------------------------------------------------
// Schema

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    pub columns: Vec<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub sample_rows: Vec<String>,
}

/// `{"tables": {NAME: {columns, description, sample_rows}}}`
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaFile {
    pub tables: BTreeMap<String, TableSchema>,
}

impl SchemaFile {
    pub fn load(path: &Path) -> Result<Self> {
        let schema: Self = read_json(path)?;
        schema.table_ids().map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Ok(schema)
    }

    /// Digest of table names and columns; descriptions do not affect it.
    pub fn hash(&self) -> String {
        schema_hash(
            self.tables
                .iter()
                .map(|(name, t)| (name.as_str(), t.columns.iter().map(String::as_str))),
        )
    }

    pub fn table_ids(&self) -> std::result::Result<Vec<TableId>, semcache_core::SignatureError> {
        self.tables.keys().map(|n| TableId::new(n)).collect()
    }

    pub fn table_context(&self) -> TableContext {
        let mut ctx = TableContext::default();
        for (name, t) in &self.tables {
            let Ok(id) = TableId::new(name) else { continue };
            if !t.description.is_empty() {
                ctx.descriptions.insert(id.clone(), t.description.clone());
            }
            if !t.sample_rows.is_empty() {
                ctx.sample_rows.insert(id, t.sample_rows.join("\n"));
            }
        }
        ctx
    }
}

pub fn load_repository(path: &Path, schema: &SchemaFile) -> Result<PromptRepository> {
    let fragments: Vec<PromptFragment> = read_jsonl(path)?;
    let tables = schema.table_ids().map_err(|e| Error::Input(e.to_string()))?;
    Ok(PromptRepository::new(fragments, tables)?)
}

// ---------------------------------------------------------------------------
// Corpus, log, fixtures

/// One reference question-answer pair. Plan and code are synthesized by the
/// mock planner and code generator when absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRecord {
    pub question: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryLogRecord {
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_intent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_id: Option<String>,
}

fn non_empty(field: &'static str, value: &str) -> std::result::Result<(), String> {
    if value.trim().is_empty() {
        Err(format!("{field} must be non-empty"))
    } else {
        Ok(())
    }
}

pub fn load_corpus(path: &Path) -> Result<Vec<SeedRecord>> {
    read_jsonl_checked(path, |r: &SeedRecord| non_empty("question", &r.question))
}

pub fn load_log(path: &Path) -> Result<Vec<QueryLogRecord>> {
    read_jsonl_checked(path, |r: &QueryLogRecord| non_empty("query", &r.query))
}

pub type Fixtures = BTreeMap<String, Vec<ScriptedOutcome>>;

pub fn load_fixtures(path: &Path) -> Result<Fixtures> {
    read_json(path)
}
