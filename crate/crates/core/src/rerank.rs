//! Weighted fusion of text similarity with citation and court authority,
//! top-k selection and cited-case expansion.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CaseId, KnowledgeGraph, OpinionId};
use crate::index::ChunkId;
use crate::ranking::AuthorityScores;

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RerankError {
    #[error("invalid weights: {field}: {message}")]
    InvalidWeights { field: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w_text: f64,
    pub w_cit: f64,
    pub w_court: f64,
}

impl Weights {
    /// Text similarity only.
    pub const STANDARD: Weights = Weights { w_text: 1.0, w_cit: 0.0, w_court: 0.0 };

    /// Equal weight on all three components.
    pub const STRUCTURED: Weights = Weights {
        w_text: 1.0 / 3.0,
        w_cit: 1.0 / 3.0,
        w_court: 1.0 / 3.0,
    };

    pub fn new(w_text: f64, w_cit: f64, w_court: f64) -> Result<Self, RerankError> {
        let w = Self { w_text, w_cit, w_court };
        w.validate()?;
        Ok(w)
    }

    /// Each weight in [0, 1] and the sum within 1e-9 of 1.
    pub fn validate(&self) -> Result<(), RerankError> {
        for (field, v) in [("w_text", self.w_text), ("w_cit", self.w_cit), ("w_court", self.w_court)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(RerankError::InvalidWeights {
                    field,
                    message: format!("must lie in [0, 1], got {v}"),
                });
            }
        }
        let sum = self.w_text + self.w_cit + self.w_court;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(RerankError::InvalidWeights {
                field: "weights",
                message: format!("w_text + w_cit + w_court must equal 1, got {sum}"),
            });
        }
        Ok(())
    }

    pub fn combine(&self, text_sim: f64, citation: f64, court: f64) -> f64 {
        self.w_text * text_sim + self.w_cit * citation + self.w_court * court
    }

    /// `(w_cit, w_court)` rescaled to sum to 1, or halves when both are 0.
    pub fn authority_only(&self) -> (f64, f64) {
        let s = self.w_cit + self.w_court;
        if s > 0.0 {
            (self.w_cit / s, self.w_court / s)
        } else {
            (0.5, 0.5)
        }
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// A chunk-level search hit attributed to its case and opinion.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkHit {
    pub chunk_id: ChunkId,
    pub case_id: CaseId,
    pub opinion_id: OpinionId,
    pub cosine: f64,
}

/// Best-matching chunk of one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextMatch {
    pub opinion_id: OpinionId,
    pub chunk_id: ChunkId,
    pub cosine: f64,
}

/// Per case, the maximum cosine over its chunk hits. Equal maxima resolve to
/// the smallest chunk id.
pub fn aggregate_text_sim<'a>(hits: impl IntoIterator<Item = &'a ChunkHit>) -> BTreeMap<CaseId, TextMatch> {
    let mut best: BTreeMap<CaseId, TextMatch> = BTreeMap::new();
    for hit in hits {
        let candidate = TextMatch {
            opinion_id: hit.opinion_id.clone(),
            chunk_id: hit.chunk_id.clone(),
            cosine: hit.cosine,
        };
        match best.get_mut(&hit.case_id) {
            None => {
                best.insert(hit.case_id.clone(), candidate);
            }
            Some(cur) => {
                let better = hit.cosine > cur.cosine
                    || (hit.cosine == cur.cosine && hit.chunk_id < cur.chunk_id);
                if better {
                    *cur = candidate;
                }
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub case_id: CaseId,
    pub opinion_id: OpinionId,
    /// Per-query min-max scaled cosine.
    pub text_sim: f64,
    pub citation: f64,
    pub court: f64,
    pub fused: f64,
    pub best_chunk: ChunkId,
    /// Unscaled cosine of `best_chunk`.
    pub cosine: f64,
}

/// Descending fused score, then descending citation, then ascending case id.
pub fn fused_order(a: &CandidateScore, b: &CandidateScore) -> Ordering {
    b.fused
        .total_cmp(&a.fused)
        .then_with(|| b.citation.total_cmp(&a.citation))
        .then_with(|| a.case_id.cmp(&b.case_id))
}

/// Builds unfused candidates: text similarity is min-max scaled over the
/// pool, citation and court take the corpus-wide scaled authority scores.
pub fn candidates(
    matches: &BTreeMap<CaseId, TextMatch>,
    graph: &KnowledgeGraph,
    authority: &AuthorityScores,
) -> Vec<CandidateScore> {
    let (lo, hi) = matches.values().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
        (lo.min(m.cosine), hi.max(m.cosine))
    });
    let range = hi - lo;
    matches
        .iter()
        .map(|(case_id, m)| CandidateScore {
            case_id: case_id.clone(),
            opinion_id: m.opinion_id.clone(),
            text_sim: if range > 0.0 { (m.cosine - lo) / range } else { 0.5 },
            citation: authority.citation(case_id.as_str()).unwrap_or(0.0),
            court: authority.court_of_case(graph, case_id.as_str()).unwrap_or(0.0),
            fused: 0.0,
            best_chunk: m.chunk_id.clone(),
            cosine: m.cosine,
        })
        .collect()
}

/// Computes `w_text·text_sim + w_cit·citation + w_court·court` for each
/// candidate and sorts by [`fused_order`].
pub fn fuse(mut candidates: Vec<CandidateScore>, weights: &Weights) -> Result<Vec<CandidateScore>, RerankError> {
    weights.validate()?;
    for c in &mut candidates {
        c.fused = weights.combine(c.text_sim, c.citation, c.court);
    }
    candidates.sort_by(fused_order);
    Ok(candidates)
}

/// The first `k` candidates under [`fused_order`].
pub fn select_top_k(scored: &[CandidateScore], k: usize) -> Vec<CandidateScore> {
    let mut sorted = scored.to_vec();
    sorted.sort_by(fused_order);
    sorted.truncate(k);
    sorted
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    /// Highest-ranked top-k case that cites `cited`.
    pub source: CaseId,
    pub cited: CaseId,
    /// 1-based.
    pub rank: usize,
    pub citation: f64,
    pub court: f64,
    pub score: f64,
}

/// Cases cited by the top-k that are not themselves in the top-k, ranked
/// by the authority-only share of `weights`, truncated to `n`.
pub fn expand_citations(
    top_k: &[CandidateScore],
    graph: &KnowledgeGraph,
    authority: &AuthorityScores,
    weights: &Weights,
    n: usize,
) -> Vec<Expansion> {
    if n == 0 {
        return Vec::new();
    }
    let (wc, wk) = weights.authority_only();
    let mut sources: BTreeMap<CaseId, CaseId> = BTreeMap::new();
    for member in top_k {
        let cited = graph.cited_cases(member.case_id.as_str(), 1).unwrap_or_default();
        for c in cited {
            if top_k.iter().any(|m| m.case_id == c) {
                continue;
            }
            sources.entry(c).or_insert_with(|| member.case_id.clone());
        }
    }
    let mut out: Vec<Expansion> = sources
        .into_iter()
        .map(|(cited, source)| {
            let citation = authority.citation(cited.as_str()).unwrap_or(0.0);
            let court = authority.court_of_case(graph, cited.as_str()).unwrap_or(0.0);
            Expansion { source, cited, rank: 0, citation, court, score: wc * citation + wk * court }
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| b.citation.total_cmp(&a.citation))
            .then_with(|| a.cited.cmp(&b.cited))
    });
    out.truncate(n);
    for (i, e) in out.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalSelection {
    pub top_k: Vec<CandidateScore>,
    pub expansions: Vec<Expansion>,
    pub k: usize,
    pub n: usize,
}
