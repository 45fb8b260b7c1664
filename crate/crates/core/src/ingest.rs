//! Corpus directory ingestion: lenient load, citation edges derived from
//! opinion text, and a validation report.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::citation::{
    build_citation_edges, AmbiguousKey, CitationExtractor, CitationIndex, UnparsedCitation,
    UnresolvedCitation,
};
use crate::graph::{CorpusLoader, CorpusStats, CourtId, GraphError, KnowledgeGraph, LoadMode};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{0}: no records")]
    NoRecords(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViolationRecord {
    pub source: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub files: Vec<String>,
    pub records: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<CorpusStats>,
    pub auto_created_courts: Vec<CourtId>,
    pub violations: Vec<ViolationRecord>,
    /// Citation edges found in opinion text that the records did not list.
    pub derived_citations: usize,
    pub unresolved_citations: Vec<UnresolvedCitation>,
    pub ambiguous_citations: Vec<AmbiguousKey>,
    pub unparsed_case_citations: Vec<UnparsedCitation>,
    pub self_citations: usize,
    pub near_misses: usize,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug)]
pub struct Ingested {
    /// Present when the corpus loaded without violations.
    pub graph: Option<KnowledgeGraph>,
    pub report: IngestReport,
}

/// Corpus files in `dir`: every `*.jsonl` file, sorted by name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let io = |source| IngestError::Io { path: dir.to_owned(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "jsonl") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads a file or a directory of record files. Schema problems are
/// collected in the report rather than aborting; the graph is only
/// returned when there were none.
pub fn ingest_path(path: &Path, extractor: &CitationExtractor) -> Result<Ingested, IngestError> {
    let files = if path.is_dir() { corpus_files(path)? } else { vec![path.to_owned()] };
    let mut loader = CorpusLoader::new(LoadMode::Lenient);
    let mut report = IngestReport::default();
    for f in &files {
        let file = File::open(f).map_err(|source| IngestError::Io { path: f.clone(), source })?;
        let name = f.file_name().map_or_else(|| f.display().to_string(), |n| n.to_string_lossy().into_owned());
        loader.read(&name, BufReader::new(file))?;
        report.files.push(name);
    }
    if loader.record_count() == 0 {
        return Err(IngestError::NoRecords(path.to_owned()));
    }
    let (mut builder, load) = loader.finish()?;
    report.records = load.records;
    report.auto_created_courts = load.auto_created_courts;
    report.violations = load
        .violations
        .iter()
        .map(|v| ViolationRecord { source: v.source.clone(), line: v.line, message: v.error.to_string() })
        .collect();

    let built = CitationIndex::build(builder.cases(), extractor);
    report.ambiguous_citations = built.ambiguous;
    report.unparsed_case_citations = built.unparsed;
    let edges = build_citation_edges(builder.opinions(), &built.index, extractor);
    report.unresolved_citations = edges.diagnostics.unresolved_citations;
    report.self_citations = edges.diagnostics.self_citations;
    report.near_misses = edges.diagnostics.near_misses;
    for e in edges.edges {
        if builder.has_citation(e.from_case.as_str(), e.to_case.as_str()) {
            continue;
        }
        builder.add_citation(&e.from_case, &e.to_case)?;
        report.derived_citations += 1;
    }

    if !report.violations.is_empty() {
        return Ok(Ingested { graph: None, report });
    }
    match builder.freeze() {
        Ok(graph) => {
            report.stats = Some(graph.corpus_stats());
            Ok(Ingested { graph: Some(graph), report })
        }
        Err(e) => {
            report.violations.push(ViolationRecord { source: "<corpus>".into(), line: 0, message: e.to_string() });
            Ok(Ingested { graph: None, report })
        }
    }
}
