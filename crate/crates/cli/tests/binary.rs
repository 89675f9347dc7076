//! The `semcache` binary end to end: verbs, output files and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn semcache(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semcache"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const REPLAY: [&str; 9] = [
    "replay",
    "--cache",
    "cache.jsonl",
    "--repo",
    "data/repo.jsonl",
    "--schema",
    "data/schema.json",
    "--populate",
    "false",
];

#[test]
fn generate_seed_replay_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let o = semcache(&["generate", "--out", "data"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["corpus.jsonl", "log.jsonl", "repo.jsonl", "schema.json", "fixtures.json"] {
        assert!(d.join("data").join(f).exists(), "{f}");
    }

    let seed = ["seed", "--corpus", "data/corpus.jsonl", "--schema", "data/schema.json", "--cache", "cache.jsonl"];
    let o = semcache(&seed, d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("seeded 1021 records; cache holds 1021 entries"));
    let o = semcache(&seed, d);
    assert!(stdout(&o).contains("cache holds 1021 entries"), "re-seed is idempotent");

    let mut args = REPLAY.to_vec();
    args.extend(["--log", "data/log.jsonl", "--fixtures", "data/fixtures.json", "--out", "run"]);
    let o = semcache(&args, d);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(d.join("run/report.txt")).unwrap();
    assert_eq!(stdout(&o), text);
    assert!(text.contains("utilization"));

    let o = semcache(&["report", "--trace", "run/trace.jsonl", "--check", "run/report.json"], d);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), text);

    // Parallel replay writes the same files.
    args.extend(["--workers", "3"]);
    *args.last_mut().unwrap() = "3";
    let out_pos = args.iter().position(|a| *a == "run").unwrap();
    args[out_pos] = "run-par";
    let o = semcache(&args, d);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["report.txt", "report.json", "trace.jsonl"] {
        assert_eq!(
            std::fs::read(d.join("run").join(f)).unwrap(),
            std::fs::read(d.join("run-par").join(f)).unwrap(),
            "{f}"
        );
    }

    // Tampering with the stored report is detected.
    let json = std::fs::read_to_string(d.join("run/report.json")).unwrap();
    std::fs::write(d.join("run/report.json"), json.replacen("\"failures\": 0", "\"failures\": 1", 1)).unwrap();
    let o = semcache(&["report", "--trace", "run/trace.jsonl", "--check", "run/report.json"], d);
    assert_eq!(o.status.code(), Some(1));

    // A schema change invalidates everything.
    let schema = std::fs::read_to_string(d.join("data/schema.json")).unwrap();
    std::fs::write(d.join("schema2.json"), schema.replacen("\"PRICE\"", "\"LIST_PRICE\"", 1)).unwrap();
    let o = semcache(&["invalidate", "--cache", "cache.jsonl", "--schema", "schema2.json"], d);
    assert!(stdout(&o).contains("invalidated 1021 entries"), "{}", stdout(&o));
    let o = semcache(&["invalidate", "--cache", "cache.jsonl", "--schema", "schema2.json"], d);
    assert!(stdout(&o).contains("invalidated 0 entries"));
}

fn small_setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(semcache(&["generate", "--out", "data"], d).status.success());
    std::fs::write(
        d.join("corpus.jsonl"),
        "{\"question\":\"What is the total stock value for item code ITEM-001-BB0 at Plant-A?\",\"response\":\"$12,500.00\"}\n",
    )
    .unwrap();
    let o = semcache(
        &["seed", "--corpus", "corpus.jsonl", "--schema", "data/schema.json", "--cache", "cache.jsonl"],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    dir
}

fn replay_log(d: &Path, log: &str, extra: &[&str]) -> Output {
    std::fs::write(d.join("log.jsonl"), log).unwrap();
    let mut args = REPLAY.to_vec();
    args.extend(["--log", "log.jsonl", "--out", "run"]);
    args.extend(extra);
    semcache(&args, d)
}

#[test]
fn exit_codes() {
    let dir = small_setup();
    let d = dir.path();
    let dup = "{\"query\":\"What is the total stock value for item code ITEM-001-BB0 at Plant-A?\",\"expected_mode\":\"return\"}\n";

    let o = replay_log(d, dup, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("utilization                           100.0%"), "{}", stdout(&o));

    let wrong = dup.replace("\"return\"", "\"generate\"");
    assert_eq!(replay_log(d, &wrong, &[]).status.code(), Some(1));

    let o = replay_log(d, &format!("{dup}{{broken\n"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("log.jsonl:2:"), "{}", stderr(&o));

    let bound = "{\"query\":\"How many units of ITEM-5 on hand?\",\"fixture_id\":\"nope\"}\n";
    let o = replay_log(d, bound, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("record 1") && stderr(&o).contains("nope"), "{}", stderr(&o));

    assert_eq!(replay_log(d, "", &["--theta-guide", "1.5"]).status.code(), Some(2));
    let o = replay_log(d, "", &["--populate", "true", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("population off"), "{}", stderr(&o));
    let o = replay_log(d, "", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some(format!("{:<24}{:>10}", "records", 0).as_str()));
}

#[test]
fn scripted_fixtures_and_saved_cache() {
    let dir = small_setup();
    let d = dir.path();
    std::fs::write(
        d.join("fixtures.json"),
        r#"{"flaky": [{"status": "error", "message": "KeyError: 'QTY'"}]}"#,
    )
    .unwrap();
    let log = "{\"query\":\"What is the total stock value for item code ITEM-001-NN0 at Plant-B?\",\"fixture_id\":\"flaky\"}\n";
    let o = replay_log(
        d,
        log,
        &["--fixtures", "fixtures.json", "--populate", "true", "--save-cache", "after.jsonl", "--checkpoint-dir", "ckpt"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = std::fs::read_to_string(d.join("run/trace.jsonl")).unwrap();
    assert!(trace.contains("\"retry_count\":1") && trace.contains("\"executor_calls\":2"), "{trace}");
    let saved = std::fs::read_to_string(d.join("after.jsonl")).unwrap();
    assert_eq!(saved.lines().count(), 3, "header plus reference plus populated entry");
    assert!(std::fs::read_dir(d.join("ckpt")).unwrap().count() > 5);
}
