use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use precedent_core::fixtures::{self, Fixture};
use precedent_core::graph::Record;
use serde_json::Value;

fn precedent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_precedent")).args(args).env_remove("PRECEDENT_K").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes the fixture as two record files and ingests it.
fn ingested(dir: &Path, fx: &Fixture) -> String {
    let corpus = dir.join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    let (head, tail) = fx.records.split_at(fx.records.len() / 2);
    for (name, part) in [("a.jsonl", head), ("b.jsonl", tail)] {
        let text: String = part.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();
        std::fs::write(corpus.join(name), text).unwrap();
    }
    let store = dir.join("store.jsonl");
    let o = precedent(&["ingest", "--corpus", corpus.to_str().unwrap(), "--store", store.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    store.to_str().unwrap().to_owned()
}

fn record_set(text: &str) -> BTreeSet<String> {
    text.lines().map(|l| serde_json::to_string(&Record::parse_line(l).unwrap()).unwrap()).collect()
}

#[test]
fn ingest_then_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures::ten_case();
    let store = ingested(dir.path(), &fx);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(format!("{store}.report.json")).unwrap()).unwrap();
    assert_eq!(report["stats"]["case_count"], fx.expected_stats.case_count);
    assert!(report["violations"].as_array().unwrap().is_empty());

    let o = precedent(&["export", "--store", &store]);
    assert!(o.status.success());
    let want: BTreeSet<String> = fx.records.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
    assert_eq!(record_set(&stdout(&o)), want);
}

#[test]
fn stats_reports_fixture_counts() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures::ten_case();
    let store = ingested(dir.path(), &fx);
    let o = precedent(&["stats", "--store", &store, "--json"]);
    assert!(o.status.success());
    let s: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(s["case_count"], fx.expected_stats.case_count);
    assert_eq!(s["opinion_count"], fx.expected_stats.opinion_count);
    assert_eq!(s["court_count"], fx.expected_stats.court_count);
    assert_eq!(s["citation_count"], fx.expected_stats.citation_count);
    let table = stdout(&precedent(&["stats", "--store", &store]));
    assert!(table.contains(&format!("Total number of cases     {}", fx.expected_stats.case_count)), "{table}");
}

#[test]
fn rank_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let store = ingested(dir.path(), &fixtures::landmark(3).fixture);
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let hist = dir.path().join("hist.jsonl");
    for out in [&a, &b] {
        let o = precedent(&["rank", "--store", &store, "--out", out.to_str().unwrap(), "--histogram", hist.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let lines: Vec<Value> = String::from_utf8(first).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.iter().any(|l| l["scope"] == "court"));
    assert!(lines.iter().all(|l| (0.0..=1.0).contains(&l["scaled"].as_f64().unwrap())));
    assert!(!std::fs::read_to_string(&hist).unwrap().is_empty());
}

#[test]
fn text_only_query_rows_sorted_by_text_similarity() {
    let dir = tempfile::tempdir().unwrap();
    let store = ingested(dir.path(), &fixtures::ten_case());
    let args = ["query", "--store", &store, "parody of a popular song", "--w-text", "1", "--w-cit", "0", "--w-court", "0", "--k", "6"];
    let o = precedent(&[&args[..], &["--json"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let resp: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sims: Vec<f64> = resp["results"].as_array().unwrap().iter().map(|r| r["scores"]["text_sim"].as_f64().unwrap()).collect();
    assert_eq!(sims.len(), 6);
    assert!(sims.windows(2).all(|w| w[0] >= w[1]), "{sims:?}");

    let table = stdout(&precedent(&args));
    assert!(table.lines().nth(1).unwrap().contains("citation"));
    let first = &resp["results"][0];
    let row = table.lines().nth(2).unwrap();
    assert!(row.contains(first["case_name"].as_str().unwrap()), "{row}");
    assert!(row.contains(&format!("{:.4}", first["scores"]["fused"].as_f64().unwrap())));
    assert_eq!(table, stdout(&precedent(&args)));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.jsonl");
    let o = precedent(&["stats", "--store", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(missing.to_str().unwrap()));

    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let store = dir.path().join("store.jsonl");
    let o = precedent(&["ingest", "--corpus", empty.to_str().unwrap(), "--store", store.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no records"));
    assert!(dir.path().join("store.jsonl.report.json").exists());

    let bad = dir.path().join("bad");
    std::fs::create_dir(&bad).unwrap();
    let mut text = Vec::new();
    fixtures::ten_case().write_jsonl(&mut text).unwrap();
    text.extend_from_slice(b"{\"kind\":\"passage\",\"passage_id\":\"orphan\",\"opinion_id\":\"missing\",\"factor\":\"Purpose\",\"text\":\"t\"}\n");
    std::fs::write(bad.join("corpus.jsonl"), text).unwrap();
    let report = dir.path().join("bad-report.json");
    let o = precedent(&[
        "ingest", "--corpus", bad.to_str().unwrap(), "--store", store.to_str().unwrap(), "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!store.exists());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(r["violations"][0]["message"].as_str().unwrap().contains("missing"), "{r}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(precedent(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(precedent(&["query", "x"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let store = ingested(dir.path(), &fixtures::ten_case());
    let o = precedent(&["query", "--store", &store, "parody", "--w-text", "0.7", "--w-cit", "0.7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("weights"), "{}", stderr(&o));
    let o = precedent(&["query", "--store", &store, "parody", "--factor-mode", "sideways"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(precedent(&["--help"]).status.code(), Some(0));
}
