use std::fs;

use precedent_core::citation::CitationExtractor;
use precedent_core::fixtures;
use precedent_core::graph::Record;
use precedent_core::ingest::{ingest_path, IngestError};

fn write(dir: &std::path::Path, name: &str, records: &[Record]) {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).unwrap());
        s.push('\n');
    }
    fs::write(dir.join(name), s).unwrap();
}

#[test]
fn split_fixture_ingests_cleanly() {
    let fx = fixtures::ten_case();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = fx.records.split_at(fx.records.len() / 2);
    // Later records first: the loader orders by dependency, not by file.
    write(dir.path(), "a.jsonl", b);
    write(dir.path(), "b.jsonl", a);
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let out = ingest_path(dir.path(), &CitationExtractor::default()).unwrap();
    assert!(out.report.is_clean(), "{:?}", out.report.violations);
    assert_eq!(out.report.files, ["a.jsonl", "b.jsonl"]);
    assert_eq!(out.report.stats.as_ref(), Some(&fx.expected_stats));
    assert_eq!(out.report.derived_citations, 0);
    assert!(out.report.auto_created_courts.is_empty());
    let g = out.graph.unwrap();
    assert_eq!(g.citation_edges().collect::<Vec<_>>(), fx.citation_edges);
}

#[test]
fn citations_are_recovered_from_opinion_text() {
    let fx = fixtures::ten_case();
    let dir = tempfile::tempdir().unwrap();
    let without: Vec<Record> = fx.records.iter().filter(|r| !matches!(r, Record::Citation(_))).cloned().collect();
    write(dir.path(), "corpus.jsonl", &without);
    let out = ingest_path(dir.path(), &CitationExtractor::default()).unwrap();
    assert_eq!(out.report.derived_citations, fx.citation_edges.len());
    assert_eq!(out.graph.unwrap().citation_edges().collect::<Vec<_>>(), fx.citation_edges);
}

#[test]
fn violations_block_the_graph_but_are_reported() {
    let fx = fixtures::ten_case();
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "corpus.jsonl", &fx.records);
    fs::write(
        dir.path().join("extra.jsonl"),
        "{\"kind\":\"passage\",\"passage_id\":\"orphan\",\"opinion_id\":\"missing\",\"factor\":\"Facts\",\"text\":\"x\"}\n",
    )
    .unwrap();
    let out = ingest_path(dir.path(), &CitationExtractor::default()).unwrap();
    assert!(out.graph.is_none());
    assert_eq!(out.report.violations.len(), 1);
    let v = &out.report.violations[0];
    assert_eq!((v.source.as_str(), v.line), ("extra.jsonl", 1));
    assert!(v.message.contains("missing"), "{}", v.message);
}

#[test]
fn unknown_courts_are_created_and_flagged() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.jsonl"),
        concat!(
            "{\"kind\":\"case\",\"case_id\":\"a\",\"name\":\"A v. B\",\"year\":2001,\"court_id\":\"ed-pa\",\"citations\":[\"12 F. Supp. 2d 34\"]}\n",
            "{\"kind\":\"opinion\",\"opinion_id\":\"a-o\",\"case_id\":\"a\",\"opinion_kind\":\"majority\",\"full_text\":\"See 12 F. Supp. 2d 34 and 1 F.4th 1 (2d Cir. 2021).\"}\n",
        ),
    )
    .unwrap();
    let out = ingest_path(dir.path(), &CitationExtractor::default()).unwrap();
    assert_eq!(out.report.auto_created_courts, ["ed-pa"]);
    assert_eq!(out.report.self_citations, 1);
    assert_eq!(out.report.unresolved_citations.len(), 1);
    assert_eq!(out.report.unresolved_citations[0].citation, "1 F.4th 1");
    assert!(out.graph.is_some());
}

#[test]
fn empty_directory_has_no_records() {
    let dir = tempfile::tempdir().unwrap();
    let err = ingest_path(dir.path(), &CitationExtractor::default()).unwrap_err();
    assert!(matches!(err, IngestError::NoRecords(_)));
    assert!(err.to_string().contains("no records"));
}
