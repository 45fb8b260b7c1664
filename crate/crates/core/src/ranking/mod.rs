//! Authority scores: PageRank over the citation graph (authority flows to
//! cited cases) and over the appellate court graph (rank accumulates at apex
//! courts), min-max scaling, and the per-tier influence histogram.

mod pagerank;

pub use pagerank::{pagerank, DanglingPolicy, PageRank, PageRankConfig, PowerIteration};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CaseId, CourtId, KnowledgeGraph};

#[derive(Debug, Error)]
pub enum RankError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("edge references unknown node index {0}")]
    UnknownNode(usize),
    #[error("PageRank did not converge after {} iterations (delta {:e})", .0.iterations, .0.delta)]
    DidNotConverge(Box<PageRank>),
    #[error("invalid PageRank configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot scale an empty score map")]
    EmptyInput,
}

/// PageRank scores keyed by node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedScores<K: Ord> {
    pub scores: BTreeMap<K, f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn rank_nodes<K: Ord + Clone>(
    nodes: Vec<K>,
    edges: impl IntoIterator<Item = (K, K)>,
    config: &PageRankConfig,
) -> Result<RankedScores<K>, RankError> {
    let position: BTreeMap<&K, usize> = nodes.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let edges: Vec<(usize, usize)> = edges
        .into_iter()
        .map(|(a, b)| (position[&a], position[&b]))
        .collect();
    let pr = pagerank(nodes.len(), &edges, config)?;
    Ok(RankedScores {
        scores: nodes.into_iter().zip(pr.scores).collect(),
        iterations: pr.iterations,
        converged: pr.converged,
    })
}

/// PageRank over cases with edges oriented citing → cited.
pub fn citation_authority(
    graph: &KnowledgeGraph,
    config: &PageRankConfig,
) -> Result<RankedScores<CaseId>, RankError> {
    let nodes: Vec<CaseId> = graph.cases().map(|c| c.case_id.clone()).collect();
    rank_nodes(
        nodes,
        graph.citation_edges().map(|e| (e.from_case, e.to_case)),
        config,
    )
}

/// PageRank over courts with edges oriented lower → higher court.
pub fn court_hierarchy_rank(
    graph: &KnowledgeGraph,
    config: &PageRankConfig,
) -> Result<RankedScores<CourtId>, RankError> {
    let nodes: Vec<CourtId> = graph.courts().map(|c| c.court_id.clone()).collect();
    rank_nodes(
        nodes,
        graph.appeal_edges().map(|e| (e.from_court, e.to_court)),
        config,
    )
}

/// Affine rescaling onto [0, 1]: the minimum maps to 0 and the maximum to 1.
/// When every value is equal, all map to 0.5.
pub fn min_max_scale<K: Ord + Clone>(
    scores: &BTreeMap<K, f64>,
) -> Result<BTreeMap<K, f64>, RankError> {
    let (min, max) = scores
        .values()
        .fold(None, |acc: Option<(f64, f64)>, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
        .ok_or(RankError::EmptyInput)?;
    let range = max - min;
    Ok(scores
        .iter()
        .map(|(k, &v)| {
            let scaled = if range > 0.0 { (v - min) / range } else { 0.5 };
            (k.clone(), scaled)
        })
        .collect())
}

/// Raw and scaled authority components for every case and court.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorityScores {
    pub citation_rank: BTreeMap<CaseId, f64>,
    pub court_rank: BTreeMap<CourtId, f64>,
    pub citation_scaled: BTreeMap<CaseId, f64>,
    pub court_scaled: BTreeMap<CourtId, f64>,
    pub citation_iterations: usize,
    pub court_iterations: usize,
    pub converged: bool,
}

impl AuthorityScores {
    /// Ranks both graphs. A run that exhausts `max_iterations` keeps its last
    /// iterate and sets `converged = false`.
    pub fn compute(graph: &KnowledgeGraph, config: &PageRankConfig) -> Result<Self, RankError> {
        fn keep_last<K: Ord>(
            r: Result<RankedScores<K>, RankError>,
            nodes: impl Iterator<Item = K>,
        ) -> Result<RankedScores<K>, RankError> {
            match r {
                Err(RankError::DidNotConverge(last)) => Ok(RankedScores {
                    scores: nodes.zip(last.scores).collect(),
                    iterations: last.iterations,
                    converged: false,
                }),
                other => other,
            }
        }
        let citation = keep_last(
            citation_authority(graph, config),
            graph.cases().map(|c| c.case_id.clone()),
        )?;
        let court = keep_last(
            court_hierarchy_rank(graph, config),
            graph.courts().map(|c| c.court_id.clone()),
        )?;
        Ok(Self {
            citation_scaled: min_max_scale(&citation.scores)?,
            court_scaled: min_max_scale(&court.scores)?,
            citation_rank: citation.scores,
            court_rank: court.scores,
            citation_iterations: citation.iterations,
            court_iterations: court.iterations,
            converged: citation.converged && court.converged,
        })
    }

    pub fn citation(&self, case_id: &str) -> Option<f64> {
        self.citation_scaled.get(case_id).copied()
    }

    /// Scaled court score of the court that decided `case_id`.
    pub fn court_of_case(&self, graph: &KnowledgeGraph, case_id: &str) -> Option<f64> {
        let case = graph.case(case_id)?;
        self.court_scaled.get(case.court_id.as_str()).copied()
    }

    pub fn citation_records(&self) -> Vec<ScoreRecord> {
        records(&self.citation_rank, &self.citation_scaled)
    }

    pub fn court_records(&self) -> Vec<ScoreRecord> {
        records(&self.court_rank, &self.court_scaled)
    }
}

/// Line record for exported scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    pub raw: f64,
    pub scaled: f64,
}

fn records<K: Ord + std::fmt::Display>(
    raw: &BTreeMap<K, f64>,
    scaled: &BTreeMap<K, f64>,
) -> Vec<ScoreRecord> {
    raw.iter()
        .map(|(k, &r)| ScoreRecord {
            id: k.to_string(),
            raw: r,
            scaled: scaled[k],
        })
        .collect()
}

/// One histogram cell: cases of courts at `tier` whose log10 raw score falls
/// in `bucket`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HistogramBin {
    pub tier: u32,
    pub bucket: i32,
    pub count: usize,
}

pub const DEFAULT_BINS_PER_DECADE: u32 = 4;

/// Bucket of a positive score: `floor(log10(score) * bins_per_decade)`.
pub fn log_bucket(score: f64, bins_per_decade: u32) -> Option<i32> {
    (score > 0.0 && score.is_finite())
        .then(|| (score.log10() * f64::from(bins_per_decade)).floor() as i32)
}

/// Inclusive lower bound of a bucket in log10 units.
pub fn bucket_lower_log10(bucket: i32, bins_per_decade: u32) -> f64 {
    f64::from(bucket) / f64::from(bins_per_decade)
}

/// Histogram of log-adjusted raw citation scores grouped by court tier
/// (see [`KnowledgeGraph::court_tier`]). Cases missing from the graph or with
/// non-positive scores are skipped. Sorted by (tier, bucket).
pub fn influence_distribution(
    graph: &KnowledgeGraph,
    raw_scores: &BTreeMap<CaseId, f64>,
    bins_per_decade: u32,
) -> Vec<HistogramBin> {
    let tiers = graph.court_tiers();
    let mut counts: BTreeMap<(u32, i32), usize> = BTreeMap::new();
    for (case_id, &score) in raw_scores {
        let Some(case) = graph.case(case_id.as_str()) else {
            continue;
        };
        let Some(bucket) = log_bucket(score, bins_per_decade) else {
            continue;
        };
        let tier = tiers.get(&case.court_id).copied().unwrap_or(0);
        *counts.entry((tier, bucket)).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((tier, bucket), count)| HistogramBin {
            tier,
            bucket,
            count,
        })
        .collect()
}
