//! Passage chunking, embeddings and exact cosine search.

mod chunk;

pub use chunk::{
    chunk_graph, chunk_passage, estimate_tokens, split_sentences, Chunk, ChunkDiagnostic,
    DEFAULT_MAX_TOKENS, MIN_MAX_TOKENS,
};

use std::cmp::Ordering;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Factor, PassageId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChunkId(pub String);

impl std::fmt::Display for ChunkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ChunkId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl PartialEq<&str> for ChunkId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("index is empty")]
    EmptyIndex,
    #[error("result count must be at least 1")]
    InvalidLimit,
    #[error("embedder failed: {0}")]
    Embedder(String),
    #[error("malformed index at line {line}: {message}")]
    MalformedInput { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub norm: f64,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self { values, norm }
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// Scales to unit length. Zero vectors are returned unchanged.
    pub fn normalized(self) -> Self {
        if self.norm == 0.0 {
            return self;
        }
        let n = self.norm;
        Self::new(self.values.into_iter().map(|v| v / n).collect())
    }
}

impl std::ops::Neg for EmbeddingVector {
    type Output = EmbeddingVector;

    fn neg(self) -> Self::Output {
        EmbeddingVector {
            values: self.values.into_iter().map(|v| -v).collect(),
            norm: self.norm,
        }
    }
}

/// `dot(u, v) / (|u| |v|)`, clamped to [-1, 1].
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, IndexError> {
    if u.dimension() != v.dimension() {
        return Err(IndexError::DimensionMismatch {
            left: u.dimension(),
            right: v.dimension(),
        });
    }
    if u.norm == 0.0 || v.norm == 0.0 {
        return Err(IndexError::ZeroVector);
    }
    let dot: f64 = u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum();
    Ok((dot / (u.norm * v.norm)).clamp(-1.0, 1.0))
}

/// Turns text into fixed-dimension vectors.
pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;

    /// Identifies the model; stored with persisted indexes.
    fn tag(&self) -> String;

    fn embed(&self, text: &str) -> Result<EmbeddingVector, IndexError>;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, IndexError> {
        texts.iter().map(|t| self.embed(t)).collect()
    }
}

pub const DEFAULT_DIMENSION: usize = 1024;

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "have", "in", "is",
    "it", "its", "of", "on", "or", "that", "the", "this", "to", "was", "were", "which", "with",
];

/// Deterministic hashed bag-of-words embedder.
///
/// Lowercased alphanumeric terms (minus a short stopword list) are hashed
/// with FNV-1a into buckets `1..dimension`; counts are L2-normalised.
/// Bucket 0 is reserved: text without terms embeds to the unit vector `e0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceEmbedder {
    dimension: usize,
}

impl ReferenceEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 2, "reference embedder needs at least two buckets");
        Self { dimension }
    }

    pub fn terms(text: &str) -> impl Iterator<Item = String> + '_ {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| !STOPWORDS.contains(&t.as_str()))
    }

    pub fn bucket(&self, term: &str) -> usize {
        1 + (fnv1a(term.as_bytes()) % (self.dimension as u64 - 1)) as usize
    }
}

impl Default for ReferenceEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl Embedder for ReferenceEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn tag(&self) -> String {
        format!("reference-bow-fnv1a/{}", self.dimension)
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, IndexError> {
        let mut values = vec![0.0; self.dimension];
        let mut any = false;
        for term in Self::terms(text) {
            values[self.bucket(&term)] += 1.0;
            any = true;
        }
        if !any {
            values[0] = 1.0;
        }
        Ok(EmbeddingVector::new(values).normalized())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IndexEntry {
    chunk: Chunk,
    vector: EmbeddingVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchHit<'a> {
    pub chunk: &'a Chunk,
    pub similarity: f64,
}

/// Frozen, exact (brute-force) cosine index over chunks.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    dimension: usize,
    embedder_tag: String,
    entries: Vec<IndexEntry>,
}

impl VectorIndex {
    /// Embeds `chunks` using up to `parallelism` worker threads.
    pub fn build(
        embedder: &dyn Embedder,
        chunks: Vec<Chunk>,
        parallelism: usize,
    ) -> Result<Self, IndexError> {
        let workers = parallelism.clamp(1, chunks.len().max(1));
        let per = chunks.len().div_ceil(workers).max(1);
        let vectors: Vec<EmbeddingVector> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .chunks(per)
                .map(|batch| {
                    scope.spawn(move || {
                        let texts: Vec<&str> = batch.iter().map(|c| c.text.as_str()).collect();
                        embedder.embed_batch(&texts)
                    })
                })
                .collect();
            let mut all = Vec::with_capacity(chunks.len());
            for h in handles {
                all.extend(h.join().expect("embedder thread panicked")?);
            }
            Ok::<_, IndexError>(all)
        })?;
        let entries = chunks
            .into_iter()
            .zip(vectors)
            .map(|(chunk, vector)| IndexEntry { chunk, vector })
            .collect();
        Self::from_entries(embedder.dimension(), embedder.tag(), entries)
    }

    fn from_entries(
        dimension: usize,
        embedder_tag: String,
        mut entries: Vec<IndexEntry>,
    ) -> Result<Self, IndexError> {
        for e in &entries {
            if e.vector.dimension() != dimension {
                return Err(IndexError::DimensionMismatch {
                    left: dimension,
                    right: e.vector.dimension(),
                });
            }
        }
        entries.sort_by(|a, b| a.chunk.chunk_id.cmp(&b.chunk.chunk_id));
        Ok(Self {
            dimension,
            embedder_tag,
            entries,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn embedder_tag(&self) -> &str {
        &self.embedder_tag
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn chunks(&self) -> impl Iterator<Item = &Chunk> {
        self.entries.iter().map(|e| &e.chunk)
    }

    pub fn vector(&self, chunk_id: &ChunkId) -> Option<&EmbeddingVector> {
        self.entries
            .binary_search_by(|e| e.chunk.chunk_id.cmp(chunk_id))
            .ok()
            .map(|i| &self.entries[i].vector)
    }

    /// Exact top-`m` chunks by cosine similarity, ties broken by ascending
    /// chunk id. With a filter, only chunks of that factor are considered.
    pub fn search(
        &self,
        query: &EmbeddingVector,
        m: usize,
        factor_filter: Option<Factor>,
    ) -> Result<Vec<SearchHit<'_>>, IndexError> {
        if self.entries.is_empty() {
            return Err(IndexError::EmptyIndex);
        }
        if m == 0 {
            return Err(IndexError::InvalidLimit);
        }
        let mut hits = Vec::new();
        for e in &self.entries {
            if factor_filter.is_some_and(|f| f != e.chunk.factor) {
                continue;
            }
            hits.push(SearchHit {
                chunk: &e.chunk,
                similarity: cosine(query, &e.vector)?,
            });
        }
        let order = |a: &SearchHit<'_>, b: &SearchHit<'_>| -> Ordering {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| a.chunk.chunk_id.cmp(&b.chunk.chunk_id))
        };
        if hits.len() > m {
            hits.select_nth_unstable_by(m - 1, order);
            hits.truncate(m);
        }
        hits.sort_by(order);
        Ok(hits)
    }

    /// Header line `{dimension, count, embedder_tag}`, then one record per
    /// chunk.
    pub fn write(&self, mut out: impl Write) -> Result<(), IndexError> {
        let header = IndexHeader {
            dimension: self.dimension,
            count: self.entries.len(),
            embedder_tag: self.embedder_tag.clone(),
        };
        serde_json::to_writer(&mut out, &header).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        for e in &self.entries {
            let rec = ChunkRecord {
                chunk_id: e.chunk.chunk_id.clone(),
                passage_id: e.chunk.passage_id.clone(),
                factor: e.chunk.factor,
                vector: e.vector.values.clone(),
                text: e.chunk.text.clone(),
                token_estimate: e.chunk.token_estimate,
            };
            serde_json::to_writer(&mut out, &rec).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(reader: impl BufRead) -> Result<Self, IndexError> {
        let mut lines = reader.lines().enumerate();
        let malformed = |line: usize, message: String| IndexError::MalformedInput { line, message };
        let (_, first) = lines
            .next()
            .ok_or_else(|| malformed(1, "missing header".into()))?;
        let header: IndexHeader =
            serde_json::from_str(&first?).map_err(|e| malformed(1, e.to_string()))?;
        let mut entries = Vec::with_capacity(header.count);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ChunkRecord =
                serde_json::from_str(&line).map_err(|e| malformed(i + 1, e.to_string()))?;
            entries.push(IndexEntry {
                chunk: Chunk {
                    chunk_id: rec.chunk_id,
                    passage_id: rec.passage_id,
                    factor: rec.factor,
                    text: rec.text,
                    token_estimate: rec.token_estimate,
                },
                vector: EmbeddingVector::new(rec.vector),
            });
        }
        if entries.len() != header.count {
            return Err(malformed(
                entries.len() + 1,
                format!("header declares {} chunks, found {}", header.count, entries.len()),
            ));
        }
        Self::from_entries(header.dimension, header.embedder_tag, entries)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexHeader {
    dimension: usize,
    count: usize,
    embedder_tag: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChunkRecord {
    chunk_id: ChunkId,
    passage_id: PassageId,
    factor: Factor,
    vector: Vec<f64>,
    text: String,
    token_estimate: usize,
}
