//! Query orchestration: optional factor analysis, chunk search, fusion,
//! expansion and prompt assembly.

mod analyze;
pub mod prompts;

pub use analyze::{
    CompletionClient, CompletionError, FactorAnalysis, FactorAnalyzer, LlmAnalyzer, TemplateAnalyzer,
    FACTOR_TEMPLATES,
};

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CaseId, CaseNode, CorpusStats, CourtId, Factor, KnowledgeGraph, OpinionId};
use crate::index::{self, ChunkId, Embedder, IndexError, VectorIndex};
use crate::ranking::{AuthorityScores, PageRankConfig, RankError};
use crate::rerank::{self, ChunkHit, RerankError, RetrievalSelection, Weights};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("corpus has no indexed passages")]
    EmptyCorpus,
    #[error(transparent)]
    InvalidWeights(#[from] RerankError),
    #[error("invalid request: {field}: {message}")]
    InvalidRequest { field: &'static str, message: String },
    #[error("factor analysis needs a completion endpoint")]
    AnalyzerUnavailable,
    #[error("factor analysis failed: {0}")]
    Analyzer(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("index does not match corpus: {0}")]
    IndexMismatch(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Rank(#[from] RankError),
}

impl PipelineError {
    /// Request field at fault, for client-facing messages.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            PipelineError::InvalidRequest { field, .. } => Some(field),
            PipelineError::InvalidWeights(RerankError::InvalidWeights { field, .. }) => Some(field),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMode {
    /// Embed the dispute text once.
    #[default]
    WholeQuery,
    /// Search one analyzer sub-query per statutory factor against that
    /// factor's passages.
    PerFactor,
}

impl std::str::FromStr for FactorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "whole_query" => Ok(FactorMode::WholeQuery),
            "per_factor" => Ok(FactorMode::PerFactor),
            other => Err(format!("unknown factor mode {other:?}; expected whole_query or per_factor")),
        }
    }
}

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_N: usize = 3;
pub const DEFAULT_POOL_SIZE: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub text: String,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub factor_mode: FactorMode,
    #[serde(default)]
    pub factor_filter: Option<Factor>,
    #[serde(default)]
    pub include_prompts: bool,
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_n() -> usize {
    DEFAULT_N
}

impl QueryRequest {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            weights: Weights::default(),
            k: DEFAULT_K,
            n: DEFAULT_N,
            factor_mode: FactorMode::WholeQuery,
            factor_filter: None,
            include_prompts: false,
        }
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.text.trim().is_empty() {
            return Err(PipelineError::InvalidRequest { field: "text", message: "must not be empty".into() });
        }
        self.weights.validate()?;
        if self.k == 0 {
            return Err(PipelineError::InvalidRequest { field: "k", message: "must be at least 1".into() });
        }
        if self.factor_mode == FactorMode::PerFactor {
            if let Some(f) = self.factor_filter {
                if !Factor::STATUTORY.contains(&f) {
                    return Err(PipelineError::InvalidRequest {
                        field: "factor_filter",
                        message: format!("per_factor mode only searches the four statutory factors, not {f}"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub text_sim: f64,
    pub citation: f64,
    pub court: f64,
    pub fused: f64,
    /// Unscaled cosine of the best chunk.
    pub cosine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub rank: usize,
    pub case_id: CaseId,
    pub case_name: String,
    pub year: i32,
    pub court_id: CourtId,
    pub court_name: String,
    pub opinion_id: OpinionId,
    pub best_chunk: ChunkId,
    pub best_chunk_text: String,
    pub scores: ScoreBreakdown,
    /// Passage texts of all the case's opinions, by factor.
    pub passages: BTreeMap<Factor, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionEntry {
    pub rank: usize,
    pub source: CaseId,
    pub case_id: CaseId,
    pub case_name: String,
    pub year: i32,
    pub citation: f64,
    pub court: f64,
    pub score: f64,
}

/// Milliseconds per stage. Not covered by determinism guarantees.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub analyze_ms: f64,
    pub search_ms: f64,
    pub fuse_ms: f64,
    pub expand_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub weights: Weights,
    pub factor_mode: FactorMode,
    pub candidate_count: usize,
    pub selection: RetrievalSelection,
    pub results: Vec<ResultEntry>,
    pub expansions: Vec<ExpansionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<FactorAnalysis>,
    /// Case analysis prompts, one per result, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompts: Option<Vec<String>>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub max_tokens: usize,
    /// Number of chunk hits (M) whose cases form the candidate pool.
    pub pool_size: usize,
    pub pagerank: PageRankConfig,
    pub parallelism: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            max_tokens: index::DEFAULT_MAX_TOKENS,
            pool_size: DEFAULT_POOL_SIZE,
            pagerank: PageRankConfig::default(),
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()).min(8),
        }
    }
}

/// Frozen corpus, index and scores, ready to answer queries from many
/// threads at once.
pub struct Engine {
    graph: KnowledgeGraph,
    index: VectorIndex,
    authority: AuthorityScores,
    embedder: Arc<dyn Embedder>,
    analyzer: Arc<dyn FactorAnalyzer>,
    pool_size: usize,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("cases", &self.graph.corpus_stats().case_count)
            .field("chunks", &self.index.len())
            .field("embedder", &self.embedder.tag())
            .field("pool_size", &self.pool_size)
            .finish()
    }
}

impl Engine {
    /// Chunks and embeds every passage, and ranks cases and courts.
    pub fn build(
        graph: KnowledgeGraph,
        embedder: Arc<dyn Embedder>,
        config: &EngineConfig,
    ) -> Result<Self, PipelineError> {
        if graph.is_empty() {
            return Err(PipelineError::EmptyCorpus);
        }
        let (chunks, _) = index::chunk_graph(&graph, config.max_tokens);
        let index = VectorIndex::build(embedder.as_ref(), chunks, config.parallelism)?;
        let authority = AuthorityScores::compute(&graph, &config.pagerank)?;
        Self::from_parts(graph, index, authority, embedder, config.pool_size)
    }

    pub fn from_parts(
        graph: KnowledgeGraph,
        index: VectorIndex,
        authority: AuthorityScores,
        embedder: Arc<dyn Embedder>,
        pool_size: usize,
    ) -> Result<Self, PipelineError> {
        if index.dimension() != embedder.dimension() {
            return Err(PipelineError::IndexMismatch(format!(
                "index dimension {} but embedder dimension {}",
                index.dimension(),
                embedder.dimension()
            )));
        }
        if index.embedder_tag() != embedder.tag() {
            return Err(PipelineError::IndexMismatch(format!(
                "index built with {:?}, embedder is {:?}",
                index.embedder_tag(),
                embedder.tag()
            )));
        }
        if let Some(c) = index.chunks().find(|c| graph.passage(c.passage_id.as_str()).is_none()) {
            return Err(PipelineError::IndexMismatch(format!("chunk {} has no passage", c.chunk_id)));
        }
        Ok(Self {
            graph,
            index,
            authority,
            embedder,
            analyzer: Arc::new(TemplateAnalyzer),
            pool_size: pool_size.max(1),
        })
    }

    pub fn with_analyzer(mut self, analyzer: Arc<dyn FactorAnalyzer>) -> Self {
        self.analyzer = analyzer;
        self
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.graph
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }

    pub fn authority(&self) -> &AuthorityScores {
        &self.authority
    }

    pub fn embedder(&self) -> &dyn Embedder {
        self.embedder.as_ref()
    }

    pub fn stats(&self) -> CorpusStats {
        self.graph.corpus_stats()
    }

    fn search(&self, text: &str, filter: Option<Factor>) -> Result<Vec<ChunkHit>, PipelineError> {
        let q = self.embedder.embed(text)?;
        let hits = self.index.search(&q, self.pool_size, filter)?;
        hits.into_iter()
            .map(|h| {
                let passage = self.graph.passage(h.chunk.passage_id.as_str());
                let opinion = passage.and_then(|p| self.graph.opinion(p.opinion_id.as_str()));
                let opinion = opinion.ok_or_else(|| {
                    PipelineError::IndexMismatch(format!("chunk {} has no opinion", h.chunk.chunk_id))
                })?;
                Ok(ChunkHit {
                    chunk_id: h.chunk.chunk_id.clone(),
                    case_id: opinion.case_id.clone(),
                    opinion_id: opinion.opinion_id.clone(),
                    cosine: h.similarity,
                })
            })
            .collect()
    }

    pub fn retrieve(&self, request: &QueryRequest) -> Result<QueryResponse, PipelineError> {
        let started = Instant::now();
        request.validate()?;
        if self.index.is_empty() {
            return Err(PipelineError::EmptyCorpus);
        }
        let mut timing = Timing::default();
        let ms = |t: Instant| t.elapsed().as_secs_f64() * 1e3;

        let t = Instant::now();
        let analysis = match request.factor_mode {
            FactorMode::WholeQuery => None,
            FactorMode::PerFactor => {
                let a = self.analyzer.analyze(&request.text)?;
                a.validate()?;
                Some(a)
            }
        };
        timing.analyze_ms = ms(t);

        let t = Instant::now();
        let hits = match &analysis {
            None => self.search(&request.text, request.factor_filter)?,
            Some(a) => {
                let mut all = Vec::new();
                for (factor, sub_query) in &a.sub_queries {
                    if request.factor_filter.is_some_and(|f| f != *factor) {
                        continue;
                    }
                    all.extend(self.search(sub_query, Some(*factor))?);
                }
                all
            }
        };
        let matches = rerank::aggregate_text_sim(&hits);
        timing.search_ms = ms(t);

        let t = Instant::now();
        let pool = rerank::candidates(&matches, &self.graph, &self.authority);
        let candidate_count = pool.len();
        let fused = rerank::fuse(pool, &request.weights)?;
        let top_k = rerank::select_top_k(&fused, request.k);
        timing.fuse_ms = ms(t);

        let t = Instant::now();
        let expansions =
            rerank::expand_citations(&top_k, &self.graph, &self.authority, &request.weights, request.n);
        timing.expand_ms = ms(t);

        let results: Vec<ResultEntry> = top_k.iter().enumerate().map(|(i, c)| self.result_entry(i + 1, c)).collect();
        let expansion_entries = expansions
            .iter()
            .map(|e| {
                let case = self.graph.case(e.cited.as_str());
                ExpansionEntry {
                    rank: e.rank,
                    source: e.source.clone(),
                    case_id: e.cited.clone(),
                    case_name: case.map(|c| c.name.clone()).unwrap_or_default(),
                    year: case.map_or(0, |c| c.year),
                    citation: e.citation,
                    court: e.court,
                    score: e.score,
                }
            })
            .collect();
        let prompts = request.include_prompts.then(|| {
            top_k
                .iter()
                .filter_map(|c| {
                    let case = self.graph.case(c.case_id.as_str())?;
                    let passages = self.case_passages(case);
                    Some(prompts::build_case_analysis_prompt(&request.text, case, &passages))
                })
                .collect()
        });
        timing.total_ms = ms(started);

        Ok(QueryResponse {
            weights: request.weights,
            factor_mode: request.factor_mode,
            candidate_count,
            selection: RetrievalSelection { top_k, expansions, k: request.k, n: request.n },
            results,
            expansions: expansion_entries,
            analysis,
            prompts,
            timing,
        })
    }

    fn case_passages(&self, case: &CaseNode) -> Vec<&crate::graph::FactorPassage> {
        self.graph
            .opinions_of(case.case_id.as_str())
            .into_iter()
            .flat_map(|o| self.graph.passages_of(o.opinion_id.as_str()))
            .collect()
    }

    fn result_entry(&self, rank: usize, c: &rerank::CandidateScore) -> ResultEntry {
        let case = self.graph.case(c.case_id.as_str());
        let court = case.and_then(|k| self.graph.court(k.court_id.as_str()));
        let mut passages: BTreeMap<Factor, Vec<String>> = BTreeMap::new();
        if let Some(case) = case {
            for p in self.case_passages(case) {
                passages.entry(p.factor).or_default().push(p.text.clone());
            }
        }
        let best_chunk_text = self
            .index
            .chunks()
            .find(|ch| ch.chunk_id == c.best_chunk)
            .map(|ch| ch.text.clone())
            .unwrap_or_default();
        ResultEntry {
            rank,
            case_id: c.case_id.clone(),
            case_name: case.map(|k| k.name.clone()).unwrap_or_default(),
            year: case.map_or(0, |k| k.year),
            court_id: case.map(|k| k.court_id.clone()).unwrap_or_else(|| CourtId::from("")),
            court_name: court.map(|k| k.name.clone()).unwrap_or_default(),
            opinion_id: c.opinion_id.clone(),
            best_chunk: c.best_chunk.clone(),
            best_chunk_text,
            scores: ScoreBreakdown {
                text_sim: c.text_sim,
                citation: c.citation,
                court: c.court,
                fused: c.fused,
                cosine: c.cosine,
            },
            passages,
        }
    }

    /// Raw and scaled authority of a case and its court.
    pub fn case_scores(&self, case_id: &str) -> Option<CaseScores> {
        let case = self.graph.case(case_id)?;
        let court_id = case.court_id.clone();
        Some(CaseScores {
            case_id: case.case_id.clone(),
            citation_raw: self.authority.citation_rank.get(case_id).copied().unwrap_or(0.0),
            citation_scaled: self.authority.citation(case_id).unwrap_or(0.0),
            court_raw: self.authority.court_rank.get(&court_id).copied().unwrap_or(0.0),
            court_scaled: self.authority.court_scaled.get(&court_id).copied().unwrap_or(0.0),
            court_tier: self.graph.court_tier(court_id.as_str()).unwrap_or(0),
            court_id,
            in_degree: self.graph.in_degree(case_id),
            out_degree: self.graph.out_degree(case_id),
        })
    }

    /// A case with its court, opinions, passages and citation neighbours.
    pub fn case_detail(&self, case_id: &str) -> Option<CaseDetail> {
        let case = self.graph.case(case_id)?.clone();
        let court = self.graph.court(case.court_id.as_str()).cloned();
        let opinions = self
            .graph
            .opinions_of(case_id)
            .into_iter()
            .map(|o| OpinionDetail {
                opinion: o.clone(),
                passages: self.graph.passages_of(o.opinion_id.as_str()).into_iter().cloned().collect(),
            })
            .collect();
        Some(CaseDetail {
            cites: self.graph.cited_cases(case_id, 1).unwrap_or_default(),
            cited_by: self.graph.citing_cases(case_id).unwrap_or_default(),
            scores: self.case_scores(case_id)?,
            case,
            court,
            opinions,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseScores {
    pub case_id: CaseId,
    pub citation_raw: f64,
    pub citation_scaled: f64,
    pub court_id: CourtId,
    pub court_raw: f64,
    pub court_scaled: f64,
    pub court_tier: u32,
    pub in_degree: usize,
    pub out_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionDetail {
    #[serde(flatten)]
    pub opinion: crate::graph::OpinionNode,
    pub passages: Vec<crate::graph::FactorPassage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDetail {
    pub case: CaseNode,
    pub court: Option<crate::graph::CourtNode>,
    pub opinions: Vec<OpinionDetail>,
    pub cites: Vec<CaseId>,
    pub cited_by: Vec<CaseId>,
    pub scores: CaseScores,
}
