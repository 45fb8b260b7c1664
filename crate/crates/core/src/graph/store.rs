//! Line-delimited JSON corpus records.
//!
//! Each line is one object tagged by `"kind"`: `case`, `court`, `opinion`,
//! `passage`, `citation` or `appeal`. Records may appear in any order; the
//! loader applies them in dependency order (courts, appeals, cases, opinions,
//! passages, citations).

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    AppealEdge, CaseNode, CitationEdge, CourtId, CourtNode, Factor, FactorPassage, GraphBuilder,
    GraphError, KnowledgeGraph, OpinionNode, Result,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Court(CourtNode),
    Appeal(AppealEdge),
    Case(CaseNode),
    Opinion(OpinionNode),
    Passage(FactorPassage),
    Citation(CitationEdge),
}

impl Record {
    fn stage(&self) -> u8 {
        match self {
            Record::Court(_) => 0,
            Record::Appeal(_) => 1,
            Record::Case(_) => 2,
            Record::Opinion(_) => 3,
            Record::Passage(_) => 4,
            Record::Citation(_) => 5,
        }
    }

    /// Parses one record line. Factor names are checked before structural
    /// decoding so an unknown factor reports `InvalidFactorKind`.
    pub fn parse_line(line: &str) -> Result<Record> {
        let value: Value = serde_json::from_str(line).map_err(|e| GraphError::MalformedInput {
            line: 0,
            message: e.to_string(),
        })?;
        if value.get("kind").and_then(Value::as_str) == Some("passage") {
            if let Some(factor) = value.get("factor").and_then(Value::as_str) {
                factor.parse::<Factor>()?;
            }
        }
        serde_json::from_value(value).map_err(|e| GraphError::MalformedInput {
            line: 0,
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    /// Abort on the first problem.
    Strict,
    /// Record problems and keep going; cases whose court is unknown get an
    /// auto-created court with no appellate parent.
    Lenient,
}

#[derive(Debug)]
pub struct Violation {
    pub source: String,
    pub line: usize,
    pub error: GraphError,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.source, self.line, self.error)
    }
}

#[derive(Debug, Default)]
pub struct LoadReport {
    pub records: usize,
    pub auto_created_courts: Vec<CourtId>,
    pub violations: Vec<Violation>,
}

#[derive(Debug)]
struct Located {
    source: String,
    line: usize,
    record: Record,
}

#[derive(Debug)]
pub struct CorpusLoader {
    mode: LoadMode,
    records: Vec<Located>,
    violations: Vec<Violation>,
}

impl CorpusLoader {
    pub fn new(mode: LoadMode) -> Self {
        Self {
            mode,
            records: Vec::new(),
            violations: Vec::new(),
        }
    }

    /// Reads every record from `reader`. Blank lines are skipped. A final
    /// line without a terminating LF is treated as truncated.
    pub fn read(&mut self, source: &str, mut reader: impl BufRead) -> Result<usize> {
        let mut buf = String::new();
        let mut line_no = 0;
        let mut count = 0;
        loop {
            buf.clear();
            let read = match reader.read_line(&mut buf) {
                Ok(n) => n,
                Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                    let err = GraphError::MalformedInput {
                        line: line_no + 1,
                        message: "invalid UTF-8".into(),
                    };
                    self.fail(source, line_no + 1, err)?;
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            if read == 0 {
                break;
            }
            line_no += 1;
            let terminated = buf.ends_with('\n');
            let text = buf.trim_end_matches(['\n', '\r']);
            if text.trim().is_empty() {
                continue;
            }
            if !terminated {
                let err = GraphError::MalformedInput {
                    line: line_no,
                    message: "unterminated final record (truncated input?)".into(),
                };
                self.fail(source, line_no, err)?;
                break;
            }
            match Record::parse_line(text) {
                Ok(record) => {
                    count += 1;
                    self.records.push(Located {
                        source: source.to_owned(),
                        line: line_no,
                        record,
                    });
                }
                Err(GraphError::MalformedInput { message, .. }) => {
                    let err = GraphError::MalformedInput {
                        line: line_no,
                        message,
                    };
                    self.fail(source, line_no, err)?;
                }
                Err(other) => self.fail(source, line_no, other)?,
            }
        }
        Ok(count)
    }

    pub fn push(&mut self, source: &str, record: Record) {
        let line = self.records.len() + 1;
        self.records.push(Located {
            source: source.to_owned(),
            line,
            record,
        });
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    fn fail(&mut self, source: &str, line: usize, error: GraphError) -> Result<()> {
        match self.mode {
            LoadMode::Strict => Err(wrap(line, error)),
            LoadMode::Lenient => {
                self.violations.push(Violation {
                    source: source.to_owned(),
                    line,
                    error,
                });
                Ok(())
            }
        }
    }

    /// Applies all records in dependency order.
    pub fn finish(mut self) -> Result<(GraphBuilder, LoadReport)> {
        let mut records = std::mem::take(&mut self.records);
        records.sort_by_key(|r| r.record.stage());
        let total = records.len();
        let mut graph = GraphBuilder::new();
        let mut auto_created = Vec::new();
        let mut pending_appeals = Vec::new();

        for Located {
            source,
            line,
            record,
        } in records
        {
            let outcome = match record {
                Record::Court(mut court) => {
                    // Parents may appear later in the input; attach afterwards.
                    if let Some(parent) = court.appeals_to.take() {
                        pending_appeals.push((
                            source.clone(),
                            line,
                            AppealEdge {
                                from_court: court.court_id.clone(),
                                to_court: parent,
                            },
                        ));
                    }
                    graph.add_court(court).map(drop)
                }
                Record::Appeal(edge) => {
                    pending_appeals.push((source.clone(), line, edge));
                    Ok(())
                }
                Record::Case(case) => {
                    if !pending_appeals.is_empty() {
                        for (src, ln, edge) in std::mem::take(&mut pending_appeals) {
                            let res = graph.set_appeal(&edge.from_court, &edge.to_court);
                            if let Err(e) = res {
                                self.fail(&src, ln, e)?;
                            }
                        }
                    }
                    if self.mode == LoadMode::Lenient && !graph.has_court(case.court_id.as_str())
                    {
                        graph.add_court(CourtNode {
                            court_id: case.court_id.clone(),
                            name: case.court_id.0.clone(),
                            appeals_to: None,
                        })?;
                        auto_created.push(case.court_id.clone());
                    }
                    graph.add_case(case).map(drop)
                }
                Record::Opinion(op) => graph.add_opinion(op).map(drop),
                Record::Passage(p) => graph.add_passage(p).map(drop),
                Record::Citation(edge) => graph.add_citation(&edge.from_case, &edge.to_case),
            };
            if let Err(e) = outcome {
                self.fail(&source, line, e)?;
            }
        }
        // Corpora without cases still need their appeals applied.
        for (src, ln, edge) in pending_appeals {
            if let Err(e) = graph.set_appeal(&edge.from_court, &edge.to_court) {
                self.fail(&src, ln, e)?;
            }
        }

        Ok((
            graph,
            LoadReport {
                records: total,
                auto_created_courts: auto_created,
                violations: self.violations,
            },
        ))
    }
}

fn wrap(line: usize, error: GraphError) -> GraphError {
    match error {
        e @ GraphError::MalformedInput { .. } => e,
        e => GraphError::AtLine {
            line,
            error: Box::new(e),
        },
    }
}

/// Strictly reads a serialized corpus and freezes it.
pub fn import(reader: impl BufRead) -> Result<KnowledgeGraph> {
    let mut loader = CorpusLoader::new(LoadMode::Strict);
    loader.read("<input>", reader)?;
    let (builder, _) = loader.finish()?;
    builder.freeze()
}

/// Records describing `graph`, in a canonical order: courts (parents before
/// children), cases, opinions, passages, citations.
pub fn records(graph: &KnowledgeGraph) -> Vec<Record> {
    let tiers = graph.court_tiers();
    let mut courts: Vec<&CourtNode> = graph.courts().collect();
    courts.sort_by(|a, b| {
        tiers[&b.court_id]
            .cmp(&tiers[&a.court_id])
            .then_with(|| a.court_id.cmp(&b.court_id))
    });
    let mut out: Vec<Record> = courts.into_iter().cloned().map(Record::Court).collect();
    out.extend(graph.cases().cloned().map(Record::Case));
    out.extend(graph.opinions().cloned().map(Record::Opinion));
    out.extend(graph.passages().cloned().map(Record::Passage));
    out.extend(graph.citation_edges().map(Record::Citation));
    out
}

/// Writes `graph` as one JSON record per line.
pub fn export(graph: &KnowledgeGraph, mut sink: impl Write) -> Result<()> {
    for record in records(graph) {
        serde_json::to_writer(&mut sink, &record).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeKind;

    fn load(text: &str) -> Result<KnowledgeGraph> {
        import(text.as_bytes())
    }

    #[test]
    fn empty_round_trip() {
        let g = GraphBuilder::new().freeze().unwrap();
        let mut buf = Vec::new();
        export(&g, &mut buf).unwrap();
        assert!(buf.is_empty());
        let back = load("").unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn order_independent_loading() {
        let text = concat!(
            r#"{"kind":"citation","from_case":"b","to_case":"a"}"#, "\n",
            r#"{"kind":"opinion","opinion_id":"a1","case_id":"a","opinion_kind":"majority","full_text":"x"}"#, "\n",
            r#"{"kind":"opinion","opinion_id":"b1","case_id":"b","opinion_kind":"dissent","full_text":"y"}"#, "\n",
            r#"{"kind":"case","case_id":"a","name":"A v. B","year":1994,"court_id":"D"}"#, "\n",
            r#"{"kind":"case","case_id":"b","name":"C v. D","year":2001,"court_id":"S"}"#, "\n",
            r#"{"kind":"court","court_id":"D","name":"District","appeals_to":"S"}"#, "\n",
            r#"{"kind":"court","court_id":"S","name":"Supreme"}"#, "\n",
        );
        let g = load(text).unwrap();
        assert_eq!(g.court("D").unwrap().appeals_to.as_ref().unwrap(), "S");
        assert_eq!(g.citing_cases("a").unwrap().len(), 1);
    }

    #[test]
    fn appeal_records_apply() {
        let text = concat!(
            r#"{"kind":"court","court_id":"D","name":"District"}"#, "\n",
            r#"{"kind":"court","court_id":"S","name":"Supreme"}"#, "\n",
            r#"{"kind":"appeal","from_court":"D","to_court":"S"}"#, "\n",
        );
        let g = load(text).unwrap();
        assert_eq!(g.appeal_edges().count(), 1);
    }

    #[test]
    fn truncated_input_is_malformed() {
        let text = concat!(
            r#"{"kind":"court","court_id":"S","name":"Supreme"}"#, "\n",
            r#"{"kind":"court","court_id":"D","na"#,
        );
        let err = load(text).unwrap_err();
        assert!(matches!(err, GraphError::MalformedInput { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_final_newline_is_malformed() {
        let err = load(r#"{"kind":"court","court_id":"S","name":"Supreme"}"#).unwrap_err();
        assert!(matches!(err, GraphError::MalformedInput { line: 1, .. }));
    }

    #[test]
    fn bad_factor_reported_by_name() {
        let text = concat!(
            r#"{"kind":"court","court_id":"S","name":"Supreme"}"#, "\n",
            r#"{"kind":"passage","passage_id":"p","opinion_id":"o","factor":"Damages","text":"t"}"#, "\n",
        );
        let err = load(text).unwrap_err();
        assert!(matches!(err.root(), GraphError::InvalidFactorKind(f) if f == "Damages"));
    }

    #[test]
    fn dangling_passage_located() {
        let text = concat!(
            r#"{"kind":"passage","passage_id":"p","opinion_id":"ghost","factor":"Purpose","text":"t"}"#,
            "\n",
        );
        let err = load(text).unwrap_err();
        match err {
            GraphError::AtLine { line, error } => {
                assert_eq!(line, 1);
                assert!(matches!(
                    *error,
                    GraphError::DanglingReference { missing_kind: NodeKind::Opinion, .. }
                ));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn lenient_mode_auto_creates_courts() {
        let text = concat!(
            r#"{"kind":"case","case_id":"a","name":"A v. B","year":1994,"court_id":"Mystery Ct."}"#, "\n",
            r#"{"kind":"opinion","opinion_id":"a1","case_id":"a","opinion_kind":"majority","full_text":"x"}"#, "\n",
            r#"{"kind":"passage","passage_id":"p","opinion_id":"ghost","factor":"Purpose","text":"t"}"#, "\n",
        );
        let mut loader = CorpusLoader::new(LoadMode::Lenient);
        loader.read("corpus.jsonl", text.as_bytes()).unwrap();
        let (builder, report) = loader.finish().unwrap();
        assert_eq!(report.auto_created_courts, vec![CourtId::from("Mystery Ct.")]);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].line, 3);
        assert!(builder.freeze().is_ok());
    }
}
