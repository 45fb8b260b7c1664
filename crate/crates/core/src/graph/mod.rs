//! Typed knowledge graph of cases, courts, opinions and factor passages.
//!
//! Relations:
//!
//! ```text
//! (Court)-[APPEALS_TO]->(Court)
//! (Case)-[DECIDED_IN]->(Court)
//! (Case)-[HAS_OPINION]->(Opinion)
//! (Passage)-[OF]->(Opinion)
//! (Case)-[CITED]->(Case)
//! ```
//!
//! A [`GraphBuilder`] accepts nodes and edges while enforcing referential
//! integrity, then [`GraphBuilder::freeze`] validates whole-graph invariants and
//! yields an immutable [`KnowledgeGraph`] that can be shared across threads.

mod store;
mod types;

pub use store::{export, import, CorpusLoader, LoadMode, LoadReport, Record, Violation};
pub use types::{
    AppealEdge, CaseId, CaseNode, CitationEdge, CourtId, CourtNode, Factor, Node, NodeKind,
    OpinionId, OpinionKind, OpinionNode, PassageId, FactorPassage, MAX_YEAR, MIN_YEAR,
};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: NodeKind, id: String },
    #[error("{kind} `{id}` references missing {missing_kind} `{missing}`")]
    DanglingReference {
        kind: NodeKind,
        id: String,
        missing_kind: NodeKind,
        missing: String,
    },
    #[error("invalid factor kind `{0}`")]
    InvalidFactorKind(String),
    #[error("case `{0}` cannot cite itself")]
    SelfCitation(CaseId),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("unknown court `{0}`")]
    UnknownCourt(String),
    #[error("appeal from `{from}` to `{to}` would create a cycle")]
    AppealCycle { from: CourtId, to: CourtId },
    #[error("court `{court}` already appeals to `{existing}`, cannot also appeal to `{requested}`")]
    ConflictingAppeal {
        court: CourtId,
        existing: CourtId,
        requested: CourtId,
    },
    #[error("case `{case_id}` has year {year}, outside {MIN_YEAR}..={MAX_YEAR}")]
    YearOutOfRange { case_id: CaseId, year: i32 },
    #[error("passage `{0}` has empty text")]
    EmptyPassage(PassageId),
    #[error("case `{0}` has no opinions")]
    CaseWithoutOpinion(CaseId),
    #[error("malformed input at line {line}: {message}")]
    MalformedInput { line: usize, message: String },
    #[error("line {line}: {error}")]
    AtLine {
        line: usize,
        #[source]
        error: Box<GraphError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GraphError {
    /// Strips location wrappers and returns the underlying violation.
    pub fn root(&self) -> &GraphError {
        match self {
            GraphError::AtLine { error, .. } => error.root(),
            other => other,
        }
    }
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// Table-1 style summary of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub case_count: usize,
    pub opinion_count: usize,
    pub court_count: usize,
    pub passage_count: usize,
    pub citation_count: usize,
    pub year_min: Option<i32>,
    pub year_max: Option<i32>,
}

#[derive(Debug, Clone, Default)]
struct GraphData {
    courts: BTreeMap<CourtId, CourtNode>,
    cases: BTreeMap<CaseId, CaseNode>,
    opinions: BTreeMap<OpinionId, OpinionNode>,
    passages: BTreeMap<PassageId, FactorPassage>,
    case_opinions: BTreeMap<CaseId, BTreeSet<OpinionId>>,
    opinion_passages: BTreeMap<OpinionId, BTreeSet<PassageId>>,
    cited: BTreeMap<CaseId, BTreeSet<CaseId>>,
    citing: BTreeMap<CaseId, BTreeSet<CaseId>>,
}

impl GraphData {
    fn stats(&self) -> CorpusStats {
        let years = self.cases.values().map(|c| c.year);
        CorpusStats {
            case_count: self.cases.len(),
            opinion_count: self.opinions.len(),
            court_count: self.courts.len(),
            passage_count: self.passages.len(),
            citation_count: self.cited.values().map(BTreeSet::len).sum(),
            year_min: years.clone().min(),
            year_max: years.max(),
        }
    }
}

/// Mutable, single-writer graph under construction.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    data: GraphData,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds any node kind, returning its id.
    pub fn add_node(&mut self, node: Node) -> Result<String> {
        match node {
            Node::Court(c) => self.add_court(c).map(|id| id.0),
            Node::Case(c) => self.add_case(c).map(|id| id.0),
            Node::Opinion(o) => self.add_opinion(o).map(|id| id.0),
            Node::Passage(p) => self.add_passage(p).map(|id| id.0),
        }
    }

    pub fn add_court(&mut self, court: CourtNode) -> Result<CourtId> {
        if self.data.courts.contains_key(&court.court_id) {
            return Err(GraphError::DuplicateId {
                kind: NodeKind::Court,
                id: court.court_id.0,
            });
        }
        if let Some(parent) = &court.appeals_to {
            if !self.data.courts.contains_key(parent) {
                return Err(GraphError::DanglingReference {
                    kind: NodeKind::Court,
                    id: court.court_id.0.clone(),
                    missing_kind: NodeKind::Court,
                    missing: parent.0.clone(),
                });
            }
        }
        let id = court.court_id.clone();
        self.data.courts.insert(id.clone(), court);
        Ok(id)
    }

    /// Sets the APPEALS_TO edge of an existing court. Re-adding the same edge
    /// is a no-op.
    pub fn set_appeal(&mut self, from: &CourtId, to: &CourtId) -> Result<()> {
        for id in [from, to] {
            if !self.data.courts.contains_key(id) {
                return Err(GraphError::UnknownCourt(id.0.clone()));
            }
        }
        if let Some(existing) = &self.data.courts[from].appeals_to {
            if existing == to {
                return Ok(());
            }
            return Err(GraphError::ConflictingAppeal {
                court: from.clone(),
                existing: existing.clone(),
                requested: to.clone(),
            });
        }
        // Walking up from `to` must never reach `from`.
        let mut cursor = Some(to);
        while let Some(c) = cursor {
            if c == from {
                return Err(GraphError::AppealCycle {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            cursor = self.data.courts[c].appeals_to.as_ref();
        }
        self.data
            .courts
            .get_mut(from)
            .expect("checked above")
            .appeals_to = Some(to.clone());
        Ok(())
    }

    pub fn add_case(&mut self, case: CaseNode) -> Result<CaseId> {
        if self.data.cases.contains_key(&case.case_id) {
            return Err(GraphError::DuplicateId {
                kind: NodeKind::Case,
                id: case.case_id.0,
            });
        }
        if !self.data.courts.contains_key(&case.court_id) {
            return Err(GraphError::DanglingReference {
                kind: NodeKind::Case,
                id: case.case_id.0.clone(),
                missing_kind: NodeKind::Court,
                missing: case.court_id.0.clone(),
            });
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&case.year) {
            return Err(GraphError::YearOutOfRange {
                case_id: case.case_id,
                year: case.year,
            });
        }
        let id = case.case_id.clone();
        self.data.cases.insert(id.clone(), case);
        Ok(id)
    }

    pub fn add_opinion(&mut self, opinion: OpinionNode) -> Result<OpinionId> {
        if self.data.opinions.contains_key(&opinion.opinion_id) {
            return Err(GraphError::DuplicateId {
                kind: NodeKind::Opinion,
                id: opinion.opinion_id.0,
            });
        }
        if !self.data.cases.contains_key(&opinion.case_id) {
            return Err(GraphError::DanglingReference {
                kind: NodeKind::Opinion,
                id: opinion.opinion_id.0.clone(),
                missing_kind: NodeKind::Case,
                missing: opinion.case_id.0.clone(),
            });
        }
        let id = opinion.opinion_id.clone();
        self.data
            .case_opinions
            .entry(opinion.case_id.clone())
            .or_default()
            .insert(id.clone());
        self.data.opinions.insert(id.clone(), opinion);
        Ok(id)
    }

    pub fn add_passage(&mut self, passage: FactorPassage) -> Result<PassageId> {
        if self.data.passages.contains_key(&passage.passage_id) {
            return Err(GraphError::DuplicateId {
                kind: NodeKind::Passage,
                id: passage.passage_id.0,
            });
        }
        if !self.data.opinions.contains_key(&passage.opinion_id) {
            return Err(GraphError::DanglingReference {
                kind: NodeKind::Passage,
                id: passage.passage_id.0.clone(),
                missing_kind: NodeKind::Opinion,
                missing: passage.opinion_id.0.clone(),
            });
        }
        if passage.text.trim().is_empty() {
            return Err(GraphError::EmptyPassage(passage.passage_id));
        }
        let id = passage.passage_id.clone();
        self.data
            .opinion_passages
            .entry(passage.opinion_id.clone())
            .or_default()
            .insert(id.clone());
        self.data.passages.insert(id.clone(), passage);
        Ok(id)
    }

    /// Adds a CITED edge. Repeated calls with the same pair keep one edge.
    pub fn add_citation(&mut self, from: &CaseId, to: &CaseId) -> Result<()> {
        for id in [from, to] {
            if !self.data.cases.contains_key(id) {
                return Err(GraphError::UnknownCase(id.0.clone()));
            }
        }
        if from == to {
            return Err(GraphError::SelfCitation(from.clone()));
        }
        self.data
            .cited
            .entry(from.clone())
            .or_default()
            .insert(to.clone());
        self.data
            .citing
            .entry(to.clone())
            .or_default()
            .insert(from.clone());
        Ok(())
    }

    pub fn has_court(&self, id: &str) -> bool {
        self.data.courts.contains_key(id)
    }

    pub fn has_citation(&self, from: &str, to: &str) -> bool {
        self.data.cited.get(from).is_some_and(|tos| tos.contains(to))
    }

    pub fn case(&self, id: &str) -> Option<&CaseNode> {
        self.data.cases.get(id)
    }

    pub fn cases(&self) -> impl Iterator<Item = &CaseNode> {
        self.data.cases.values()
    }

    pub fn opinions(&self) -> impl Iterator<Item = &OpinionNode> {
        self.data.opinions.values()
    }

    pub fn corpus_stats(&self) -> CorpusStats {
        self.data.stats()
    }

    /// Checks whole-graph invariants and returns the immutable graph.
    ///
    /// Every case must own at least one opinion.
    pub fn freeze(self) -> Result<KnowledgeGraph> {
        if let Some(case) = self
            .data
            .cases
            .keys()
            .find(|id| !self.data.case_opinions.contains_key(*id))
        {
            return Err(GraphError::CaseWithoutOpinion(case.clone()));
        }
        Ok(KnowledgeGraph { data: self.data })
    }
}

/// Immutable knowledge graph. Safe to share between threads.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    data: GraphData,
}

impl KnowledgeGraph {
    pub fn is_empty(&self) -> bool {
        self.data.cases.is_empty() && self.data.courts.is_empty()
    }

    pub fn case(&self, id: &str) -> Option<&CaseNode> {
        self.data.cases.get(id)
    }

    pub fn court(&self, id: &str) -> Option<&CourtNode> {
        self.data.courts.get(id)
    }

    pub fn opinion(&self, id: &str) -> Option<&OpinionNode> {
        self.data.opinions.get(id)
    }

    pub fn passage(&self, id: &str) -> Option<&FactorPassage> {
        self.data.passages.get(id)
    }

    pub fn cases(&self) -> impl Iterator<Item = &CaseNode> {
        self.data.cases.values()
    }

    pub fn courts(&self) -> impl Iterator<Item = &CourtNode> {
        self.data.courts.values()
    }

    pub fn opinions(&self) -> impl Iterator<Item = &OpinionNode> {
        self.data.opinions.values()
    }

    pub fn passages(&self) -> impl Iterator<Item = &FactorPassage> {
        self.data.passages.values()
    }

    pub fn opinions_of(&self, case_id: &str) -> Vec<&OpinionNode> {
        self.data
            .case_opinions
            .get(case_id)
            .into_iter()
            .flatten()
            .map(|id| &self.data.opinions[id])
            .collect()
    }

    pub fn passages_of(&self, opinion_id: &str) -> Vec<&FactorPassage> {
        self.data
            .opinion_passages
            .get(opinion_id)
            .into_iter()
            .flatten()
            .map(|id| &self.data.passages[id])
            .collect()
    }

    /// Cases reachable by following CITED edges at most `depth` hops,
    /// excluding `case_id` itself. Sorted by id.
    pub fn cited_cases(&self, case_id: &str, depth: usize) -> Result<Vec<CaseId>> {
        let start = self
            .data
            .cases
            .get_key_value(case_id)
            .map(|(k, _)| k)
            .ok_or_else(|| GraphError::UnknownCase(case_id.to_owned()))?;
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([(start, 0usize)]);
        while let Some((node, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for next in self.data.cited.get(node).into_iter().flatten() {
                if seen.insert(next) {
                    queue.push_back((next, d + 1));
                }
            }
        }
        seen.remove(start);
        Ok(seen.into_iter().cloned().collect())
    }

    /// Direct citers of `case_id`, sorted by id.
    pub fn citing_cases(&self, case_id: &str) -> Result<Vec<CaseId>> {
        if !self.data.cases.contains_key(case_id) {
            return Err(GraphError::UnknownCase(case_id.to_owned()));
        }
        Ok(self
            .data
            .citing
            .get(case_id)
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default())
    }

    pub fn out_degree(&self, case_id: &str) -> usize {
        self.data.cited.get(case_id).map_or(0, BTreeSet::len)
    }

    pub fn in_degree(&self, case_id: &str) -> usize {
        self.data.citing.get(case_id).map_or(0, BTreeSet::len)
    }

    /// All CITED edges, ordered by (from, to).
    pub fn citation_edges(&self) -> impl Iterator<Item = CitationEdge> + '_ {
        self.data.cited.iter().flat_map(|(from, tos)| {
            tos.iter().map(move |to| CitationEdge {
                from_case: from.clone(),
                to_case: to.clone(),
            })
        })
    }

    /// All APPEALS_TO edges, ordered by the lower court's id.
    pub fn appeal_edges(&self) -> impl Iterator<Item = AppealEdge> + '_ {
        self.data.courts.values().filter_map(|c| {
            c.appeals_to.as_ref().map(|to| AppealEdge {
                from_court: c.court_id.clone(),
                to_court: to.clone(),
            })
        })
    }

    pub fn corpus_stats(&self) -> CorpusStats {
        self.data.stats()
    }

    /// Height of a court in the appellate hierarchy: the length of the
    /// longest APPEALS_TO chain that ends at it. Trial courts are tier 0.
    pub fn court_tier(&self, court_id: &str) -> Option<u32> {
        self.court_tiers().get(court_id).copied()
    }

    pub fn court_tiers(&self) -> BTreeMap<CourtId, u32> {
        let mut tiers: BTreeMap<CourtId, u32> =
            self.data.courts.keys().map(|id| (id.clone(), 0)).collect();
        // Push each court's height up its chain; chains are acyclic and
        // bounded by the court count.
        for court in self.data.courts.values() {
            let mut height = 0u32;
            let mut cursor = court.appeals_to.as_ref();
            while let Some(parent) = cursor {
                height += 1;
                let entry = tiers.get_mut(parent).expect("appeal targets exist");
                if *entry >= height {
                    break;
                }
                *entry = height;
                cursor = self.data.courts[parent].appeals_to.as_ref();
            }
        }
        tiers
    }

    /// Full scan of schema invariants. A graph built through
    /// [`GraphBuilder`] always returns an empty list.
    pub fn validate(&self) -> Vec<GraphError> {
        let mut problems = Vec::new();
        for case in self.data.cases.values() {
            if !self.data.courts.contains_key(&case.court_id) {
                problems.push(GraphError::DanglingReference {
                    kind: NodeKind::Case,
                    id: case.case_id.0.clone(),
                    missing_kind: NodeKind::Court,
                    missing: case.court_id.0.clone(),
                });
            }
            if !self.data.case_opinions.contains_key(&case.case_id) {
                problems.push(GraphError::CaseWithoutOpinion(case.case_id.clone()));
            }
        }
        for op in self.data.opinions.values() {
            if !self.data.cases.contains_key(&op.case_id) {
                problems.push(GraphError::DanglingReference {
                    kind: NodeKind::Opinion,
                    id: op.opinion_id.0.clone(),
                    missing_kind: NodeKind::Case,
                    missing: op.case_id.0.clone(),
                });
            }
        }
        for p in self.data.passages.values() {
            if !self.data.opinions.contains_key(&p.opinion_id) {
                problems.push(GraphError::DanglingReference {
                    kind: NodeKind::Passage,
                    id: p.passage_id.0.clone(),
                    missing_kind: NodeKind::Opinion,
                    missing: p.opinion_id.0.clone(),
                });
            }
        }
        let limit = self.data.courts.len();
        for court in self.data.courts.values() {
            let mut steps = 0;
            let mut cursor = court.appeals_to.as_ref();
            while let Some(c) = cursor {
                steps += 1;
                if steps > limit {
                    problems.push(GraphError::AppealCycle {
                        from: court.court_id.clone(),
                        to: c.clone(),
                    });
                    break;
                }
                cursor = self.data.courts.get(c).and_then(|n| n.appeals_to.as_ref());
            }
        }
        for edge in self.citation_edges() {
            if edge.from_case == edge.to_case {
                problems.push(GraphError::SelfCitation(edge.from_case));
            }
        }
        problems
    }
}
