//! Clients for externally hosted embedding and completion models.
//!
//! Wire formats (JSON over HTTP POST):
//! embeddings `{"texts": [..]}` → `{"vectors": [[..], ..]}`;
//! completions `{"prompt": ".."}` → `{"text": ".."}`.

use std::time::Duration;

use precedent_core::index::{Embedder, EmbeddingVector, IndexError};
use precedent_core::pipeline::{CompletionClient, CompletionError};
use serde::{Deserialize, Serialize};

const TIMEOUT: Duration = Duration::from_secs(60);
const BATCH: usize = 64;

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(TIMEOUT))
        .build()
        .into()
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    endpoint: String,
    dimension: usize,
    agent: ureq::Agent,
}

impl HttpEmbedder {
    pub fn new(endpoint: impl Into<String>, dimension: usize) -> Self {
        Self { endpoint: endpoint.into(), dimension, agent: agent() }
    }

    fn request(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, IndexError> {
        let fail = |m: String| IndexError::Embedder(format!("{}: {m}", self.endpoint));
        let reply: EmbedResponse = self
            .agent
            .post(&self.endpoint)
            .send_json(EmbedRequest { texts })
            .map_err(|e| fail(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| fail(e.to_string()))?;
        if reply.vectors.len() != texts.len() {
            return Err(fail(format!("sent {} texts, got {} vectors", texts.len(), reply.vectors.len())));
        }
        reply
            .vectors
            .into_iter()
            .map(|v| {
                if v.len() != self.dimension {
                    return Err(IndexError::DimensionMismatch { left: self.dimension, right: v.len() });
                }
                let v = EmbeddingVector::new(v);
                if v.norm == 0.0 || !v.norm.is_finite() {
                    return Err(fail("returned a zero or non-finite vector".into()));
                }
                Ok(v)
            })
            .collect()
    }
}

impl Embedder for HttpEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn tag(&self) -> String {
        format!("http:{}/{}", self.endpoint, self.dimension)
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, IndexError> {
        Ok(self.request(&[text])?.remove(0))
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, IndexError> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(BATCH) {
            out.extend(self.request(batch)?);
        }
        Ok(out)
    }
}

#[derive(Serialize)]
struct CompleteRequest<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompleteResponse {
    text: String,
}

#[derive(Debug, Clone)]
pub struct HttpCompletionClient {
    endpoint: String,
    agent: ureq::Agent,
}

impl HttpCompletionClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), agent: agent() }
    }
}

impl CompletionClient for HttpCompletionClient {
    fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn complete(&self, prompt: &str) -> Result<String, CompletionError> {
        let fail = |m: String| CompletionError(format!("{}: {m}", self.endpoint));
        let reply: CompleteResponse = self
            .agent
            .post(&self.endpoint)
            .send_json(CompleteRequest { prompt })
            .map_err(|e| fail(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| fail(e.to_string()))?;
        Ok(reply.text)
    }
}
