//! Reporter citation extraction and resolution.
//!
//! Opinion text is scanned for volume–reporter–page citations
//! (`801 F.3d 1126 (9th Cir. 2015)`), each citation is resolved against the
//! reporter citations of corpus cases, and resolved pairs become CITED edges.
//! Short forms (`Id.`, `supra`) are not handled.

mod extract;
mod registry;

pub use extract::{extract_citations, Citation, CitationExtractor, Extraction, NearMiss, Span};
pub use registry::{ReporterEntry, ReporterRegistry};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CaseId, CaseNode, CitationEdge, OpinionId, OpinionNode};

#[derive(Debug, Error)]
pub enum CitationError {
    #[error("reporter registry is empty")]
    EmptyRegistry,
    #[error("invalid reporter form `{0}`")]
    InvalidReporter(String),
    #[error("reporter form `{0}` is claimed by two registry entries")]
    ConflictingVariant(String),
    #[error("malformed registry at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Exact lookup key for a published case.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CitationKey {
    pub volume: u32,
    pub reporter: String,
    pub page: u32,
}

impl From<&Citation> for CitationKey {
    fn from(c: &Citation) -> Self {
        Self {
            volume: c.volume,
            reporter: c.reporter.clone(),
            page: c.page,
        }
    }
}

impl std::fmt::Display for CitationKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.volume, self.reporter, self.page)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguousKey {
    pub key: CitationKey,
    pub cases: Vec<CaseId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnparsedCitation {
    pub case_id: CaseId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Resolved(CaseId),
    Unresolved(Citation),
}

/// Map from reporter citation to the corpus case published there.
#[derive(Debug, Clone, Default)]
pub struct CitationIndex {
    map: BTreeMap<CitationKey, CaseId>,
}

/// Result of building a [`CitationIndex`]. Keys claimed by more than one
/// case are left out of the index and reported.
#[derive(Debug, Clone, Default)]
pub struct IndexBuild {
    pub index: CitationIndex,
    pub ambiguous: Vec<AmbiguousKey>,
    pub unparsed: Vec<UnparsedCitation>,
}

impl CitationIndex {
    pub fn build<'a>(
        cases: impl IntoIterator<Item = &'a CaseNode>,
        extractor: &CitationExtractor,
    ) -> IndexBuild {
        let mut claims: BTreeMap<CitationKey, BTreeSet<CaseId>> = BTreeMap::new();
        let mut unparsed = Vec::new();
        for case in cases {
            for text in &case.citations {
                let found = extractor.extract(text);
                if found.is_empty() {
                    unparsed.push(UnparsedCitation {
                        case_id: case.case_id.clone(),
                        text: text.clone(),
                    });
                }
                for c in &found {
                    claims
                        .entry(c.into())
                        .or_default()
                        .insert(case.case_id.clone());
                }
            }
        }
        let mut map = BTreeMap::new();
        let mut ambiguous = Vec::new();
        for (key, owners) in claims {
            if owners.len() == 1 {
                map.insert(key, owners.into_iter().next().expect("one owner"));
            } else {
                ambiguous.push(AmbiguousKey {
                    key,
                    cases: owners.into_iter().collect(),
                });
            }
        }
        IndexBuild {
            index: CitationIndex { map },
            ambiguous,
            unparsed,
        }
    }

    pub fn insert(&mut self, key: CitationKey, case: CaseId) -> Option<CaseId> {
        self.map.insert(key, case)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn resolve(&self, citation: &Citation) -> Resolution {
        match self.map.get(&CitationKey::from(citation)) {
            Some(case) => Resolution::Resolved(case.clone()),
            None => Resolution::Unresolved(citation.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedCitation {
    pub opinion_id: OpinionId,
    pub citation: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDiagnostics {
    /// Citation occurrences that resolved to the citing opinion's own case.
    pub self_citations: usize,
    /// Citation occurrences with no matching corpus case.
    pub unresolved: usize,
    pub near_misses: usize,
    pub unresolved_citations: Vec<UnresolvedCitation>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeReport {
    /// Deduplicated, sorted by (from, to).
    pub edges: Vec<CitationEdge>,
    pub diagnostics: EdgeDiagnostics,
}

/// Scans every opinion and turns resolved citations into case-level edges.
/// All opinion kinds of a case count toward its edges.
pub fn build_citation_edges<'a>(
    opinions: impl IntoIterator<Item = &'a OpinionNode>,
    index: &CitationIndex,
    extractor: &CitationExtractor,
) -> EdgeReport {
    let mut edges = BTreeSet::new();
    let mut diagnostics = EdgeDiagnostics::default();
    for opinion in opinions {
        let found = extractor.extract_with_diagnostics(&opinion.full_text);
        diagnostics.near_misses += found.near_misses.len();
        for citation in found.citations {
            match index.resolve(&citation) {
                Resolution::Resolved(target) if target == opinion.case_id => {
                    diagnostics.self_citations += 1;
                }
                Resolution::Resolved(target) => {
                    edges.insert(CitationEdge {
                        from_case: opinion.case_id.clone(),
                        to_case: target,
                    });
                }
                Resolution::Unresolved(c) => {
                    diagnostics.unresolved += 1;
                    diagnostics.unresolved_citations.push(UnresolvedCitation {
                        opinion_id: opinion.opinion_id.clone(),
                        citation: c.reporter_string(),
                    });
                }
            }
        }
    }
    EdgeReport {
        edges: edges.into_iter().collect(),
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CourtId, OpinionKind};

    fn case(id: &str, cite: &str) -> CaseNode {
        CaseNode {
            case_id: id.into(),
            name: id.into(),
            year: 2015,
            court_id: CourtId::from("c"),
            citations: vec![cite.into()],
        }
    }

    fn opinion(id: &str, case: &str, text: &str) -> OpinionNode {
        OpinionNode {
            opinion_id: id.into(),
            case_id: case.into(),
            opinion_kind: OpinionKind::Majority,
            full_text: text.into(),
        }
    }

    fn lenz_index() -> (CitationIndex, CitationExtractor) {
        let ex = CitationExtractor::default();
        let cases = [case("lenz", "801 F.3d 1126"), case("warhol", "598 U.S. 508")];
        let built = CitationIndex::build(&cases, &ex);
        assert!(built.ambiguous.is_empty());
        (built.index, ex)
    }

    #[test]
    fn resolves_exact_key() {
        let (index, ex) = lenz_index();
        let c = &ex.extract("Lenz, 801 F. 3d 1126")[0];
        assert_eq!(index.resolve(c), Resolution::Resolved("lenz".into()));
        let other = &ex.extract("802 F.3d 1126")[0];
        assert_eq!(index.resolve(other), Resolution::Unresolved(other.clone()));
    }

    #[test]
    fn shared_key_is_ambiguous() {
        let ex = CitationExtractor::default();
        let cases = [case("a", "1 F.3d 1"), case("b", "1 F.3d 1"), case("c", "no cite")];
        let built = CitationIndex::build(&cases, &ex);
        assert_eq!(built.ambiguous.len(), 1);
        assert_eq!(built.ambiguous[0].cases, vec![CaseId::from("a"), "b".into()]);
        assert!(built.index.is_empty());
        assert_eq!(built.unparsed.len(), 1);
    }

    #[test]
    fn edges_from_planted_citations() {
        let (index, ex) = lenz_index();
        let ops = [
            opinion("w1", "warhol", "Cf. Lenz v. Universal Music Corp., 801 F.3d 1126 (9th Cir. 2015)."),
            opinion("w2", "warhol", "Concurring. 801 F.3d 1126, 1130."),
            opinion("l1", "lenz", "We held so in 801 F.3d 1126."),
            opinion("l2", "lenz", "Compare 999 F.3d 1 (2d Cir. 2021)."),
        ];
        let report = build_citation_edges(&ops, &index, &ex);
        assert_eq!(
            report.edges,
            vec![CitationEdge { from_case: "warhol".into(), to_case: "lenz".into() }]
        );
        assert_eq!(report.diagnostics.self_citations, 1);
        assert_eq!(report.diagnostics.unresolved, 1);
        assert_eq!(report.diagnostics.unresolved_citations[0].citation, "999 F.3d 1");
    }
}
