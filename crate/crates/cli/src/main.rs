//! `semcache` command-line harness.
//!
//! ```text
//! semcache seed       --corpus corpus.jsonl --schema schema.json --cache cache.jsonl
//! semcache replay     --log log.jsonl --cache cache.jsonl --repo repo.jsonl --schema schema.json --out run/
//! semcache report     --trace run/trace.jsonl [--check run/report.json]
//! semcache invalidate --cache cache.jsonl --schema schema.json
//! semcache generate   --out data/
//! ```
//!
//! Exit status: 0 success, 1 expectation mismatch, 2 input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use semcache::files::{self, load_cache, save_cache, SchemaFile};
use semcache::mock_agents;
use semcache::replay::{self, ReplayConfig, ReplayInputs};
use semcache::report::ReplayReport;
use semcache::synth::{self, SynthConfig};
use semcache::{Error, FileCheckpoints, Result, SharedCache};
use semcache_core::matcher::{BoostIncrements, MatcherConfig, Thresholds};
use semcache_core::mock::DEFAULT_DIMENSION;
use semcache_core::{CacheStore, DomainLexicon, PipelineConfig};

#[derive(Parser)]
#[command(name = "semcache", version, about = "Seed, replay and report on a semantic query cache")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed, sign and insert a reference corpus into a cache file.
    Seed {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Created when missing; otherwise updated in place.
        #[arg(long)]
        cache: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DIMENSION)]
        dimension: usize,
    },
    /// Replay a query log through the pipeline with mock agents.
    Replay(ReplayArgs),
    /// Recompute a report from a replay trace.
    Report {
        #[arg(long)]
        trace: PathBuf,
        /// Compare against a previously written report.json.
        #[arg(long)]
        check: Option<PathBuf>,
    },
    /// Invalidate cache entries built against a different schema.
    Invalidate {
        #[arg(long)]
        cache: PathBuf,
        #[arg(long)]
        schema: PathBuf,
    },
    /// Write the synthetic corpus, log, repository and schema.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = SynthConfig::default().seed)]
        seed: u64,
    },
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    cache: PathBuf,
    #[arg(long)]
    repo: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// JSON map of fixture id to scripted executor outcomes.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Directory for trace.jsonl, report.json and report.txt.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = Thresholds::DEFAULT_RETURN)]
    theta_return: f64,
    #[arg(long, default_value_t = Thresholds::DEFAULT_GUIDE)]
    theta_guide: f64,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Increment applied by each boost source.
    #[arg(long, default_value_t = BoostIncrements::DEFAULT_INCREMENT)]
    boost: f64,
    /// Insert successful Guide / Generate outcomes into the cache.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    populate: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write the cache after replay (hit counters, populated entries).
    #[arg(long)]
    save_cache: Option<PathBuf>,
    /// Keep per-stage checkpoints as files in this directory.
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Seed {
            corpus,
            schema,
            cache,
            dimension,
        } => {
            let records = files::load_corpus(&corpus)?;
            let schema = SchemaFile::load(&schema)?;
            let mut store = if cache.exists() {
                load_cache(&cache)?
            } else {
                CacheStore::new(dimension)
            };
            let agents = mock_agents(store.dimension());
            let count = semcache::seed_store(&mut store, &records, &agents, &schema.hash())?;
            save_cache(&store, &cache)?;
            println!("seeded {count} records; cache holds {} entries", store.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay(args) => replay_cmd(args),
        Command::Report { trace, check } => {
            let trace = replay::load_trace(&trace)?;
            let report = ReplayReport::from_trace(&trace);
            print!("{}", report.render_text());
            if let Some(path) = check {
                let stored: ReplayReport = files::read_json(&path)?;
                if stored != report {
                    eprintln!("{}: stored report differs from the trace recount", path.display());
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(exit_for(&report))
        }
        Command::Invalidate { cache, schema } => {
            let mut store = load_cache(&cache)?;
            let hash = SchemaFile::load(&schema)?.hash();
            let n = store.invalidate_by_schema(&hash);
            save_cache(&store, &cache)?;
            println!("invalidated {n} entries");
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate { out, seed } => {
            let world = synth::generate(&SynthConfig {
                seed,
                ..SynthConfig::default()
            });
            world.write(&out)?;
            println!(
                "wrote {} seeds, {} log records, {} fragments to {}",
                world.corpus.len(),
                world.log.len(),
                world.fragments.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn replay_cmd(args: ReplayArgs) -> Result<ExitCode> {
    let thresholds =
        Thresholds::new(args.theta_return, args.theta_guide).map_err(|e| Error::Input(e.to_string()))?;
    if args.k == 0 {
        return Err(Error::Input("--k must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&args.boost) {
        return Err(Error::Input("--boost must lie in [0, 1]".into()));
    }
    let config = ReplayConfig {
        pipeline: PipelineConfig {
            matcher: MatcherConfig {
                thresholds,
                k: args.k,
                boosts: BoostIncrements::uniform(args.boost),
                ..MatcherConfig::default()
            },
            populate: args.populate,
            ..PipelineConfig::default()
        },
        workers: args.workers,
    };
    config.validate()?;

    let log = files::load_log(&args.log)?;
    let schema = SchemaFile::load(&args.schema)?;
    let prompts = files::load_repository(&args.repo, &schema)?;
    let fixtures = match &args.fixtures {
        Some(p) => files::load_fixtures(p)?,
        None => files::Fixtures::new(),
    };
    let checkpoints = args.checkpoint_dir.as_deref().map(FileCheckpoints::open).transpose()?;
    let cache = SharedCache::new(load_cache(&args.cache)?);
    let tables = schema.table_context();
    let lexicon = DomainLexicon::inventory();
    let inputs = ReplayInputs {
        log: &log,
        prompts: &prompts,
        tables: &tables,
        lexicon: &lexicon,
        fixtures: &fixtures,
        checkpoints: checkpoints.as_ref(),
    };
    let out = replay::replay(&cache, &inputs, &config)?;
    replay::write_outputs(&args.out, &out)?;
    if let Some(path) = &args.save_cache {
        save_cache(&cache.into_inner(), path)?;
    }
    print!("{}", out.report.render_text());
    Ok(exit_for(&out.report))
}

fn exit_for(report: &ReplayReport) -> ExitCode {
    if report.has_mismatches() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

