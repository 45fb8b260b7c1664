use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use precedent_core::graph::Factor;
use precedent_core::pipeline::{Engine, FactorMode, PipelineError, QueryRequest};
use precedent_core::rerank::Weights;
use serde::{Deserialize, Serialize};

/// Largest accepted `k` and `n`.
pub const MAX_RESULTS: i64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryDefaults {
    pub weights: Weights,
    pub k: usize,
    pub n: usize,
}

/// Shared service state. The engine is swapped as a whole, so a request
/// sees either the old corpus or the new one.
pub struct AppState {
    engine: RwLock<Option<Arc<Engine>>>,
    defaults: QueryDefaults,
}

impl AppState {
    pub fn new(defaults: QueryDefaults) -> Self {
        Self { engine: RwLock::new(None), defaults }
    }

    pub fn with_engine(engine: Engine, defaults: QueryDefaults) -> Self {
        Self { engine: RwLock::new(Some(Arc::new(engine))), defaults }
    }

    pub fn engine(&self) -> Option<Arc<Engine>> {
        self.engine.read().expect("engine lock poisoned").clone()
    }

    /// Installs `engine` and returns the previous one.
    pub fn install(&self, engine: Engine) -> Option<Arc<Engine>> {
        self.engine.write().expect("engine lock poisoned").replace(Arc::new(engine))
    }

    pub fn defaults(&self) -> QueryDefaults {
        self.defaults
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/stats", get(stats))
        .route("/query", post(query))
        .route("/cases/{id}", get(case))
        .route("/scores/{case_id}", get(scores))
        .with_state(state)
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'static str>,
}

fn json<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match serde_json::to_vec(body) {
        Ok(bytes) => (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None),
    }
}

fn error(status: StatusCode, message: impl Into<String>, field: Option<&'static str>) -> Response {
    let body = ErrorBody { error: message.into(), field };
    (status, [(header::CONTENT_TYPE, "application/json")], serde_json::to_vec(&body).unwrap_or_default())
        .into_response()
}

fn not_loaded() -> Response {
    error(StatusCode::SERVICE_UNAVAILABLE, "corpus not loaded", None)
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    #[derive(Serialize)]
    struct Health {
        status: &'static str,
        cases: usize,
        chunks: usize,
        embedder: String,
    }
    match state.engine() {
        None => not_loaded(),
        Some(e) => json(
            StatusCode::OK,
            &Health {
                status: "ok",
                cases: e.stats().case_count,
                chunks: e.index().len(),
                embedder: e.embedder().tag(),
            },
        ),
    }
}

async fn stats(State(state): State<Arc<AppState>>) -> Response {
    #[derive(Serialize)]
    struct Stats {
        #[serde(flatten)]
        corpus: precedent_core::graph::CorpusStats,
        chunk_count: usize,
        embedder: String,
        pagerank_converged: bool,
        citation_iterations: usize,
        court_iterations: usize,
        defaults: QueryDefaults,
    }
    let Some(e) = state.engine() else {
        return not_loaded();
    };
    let a = e.authority();
    json(
        StatusCode::OK,
        &Stats {
            corpus: e.stats(),
            chunk_count: e.index().len(),
            embedder: e.embedder().tag(),
            pagerank_converged: a.converged,
            citation_iterations: a.citation_iterations,
            court_iterations: a.court_iterations,
            defaults: state.defaults(),
        },
    )
}

async fn case(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(e) = state.engine() else {
        return not_loaded();
    };
    match e.case_detail(&id) {
        Some(d) => json(StatusCode::OK, &d),
        None => error(StatusCode::NOT_FOUND, format!("unknown case {id:?}"), None),
    }
}

async fn scores(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(e) = state.engine() else {
        return not_loaded();
    };
    match e.case_scores(&id) {
        Some(s) => json(StatusCode::OK, &s),
        None => error(StatusCode::NOT_FOUND, format!("unknown case {id:?}"), None),
    }
}

/// `/query` body. Omitted fields take the configured defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryBody {
    text: String,
    weights: Option<Weights>,
    k: Option<i64>,
    n: Option<i64>,
    factor_mode: Option<FactorMode>,
    factor_filter: Option<Factor>,
    include_prompts: Option<bool>,
}

/// A 400 naming the offending field.
struct BadRequest {
    message: String,
    field: Option<&'static str>,
}

impl From<BadRequest> for Response {
    fn from(b: BadRequest) -> Self {
        error(StatusCode::BAD_REQUEST, b.message, b.field)
    }
}

fn count(field: &'static str, v: Option<i64>, default: usize, min: i64) -> Result<usize, BadRequest> {
    let v = v.unwrap_or(default as i64);
    if v < min || v > MAX_RESULTS {
        return Err(BadRequest {
            message: format!("{field}: must be between {min} and {MAX_RESULTS}, got {v}"),
            field: Some(field),
        });
    }
    Ok(v as usize)
}

fn to_request(body: &[u8], defaults: QueryDefaults) -> Result<QueryRequest, BadRequest> {
    let b: QueryBody = serde_json::from_slice(body)
        .map_err(|e| BadRequest { message: format!("body: {e}"), field: Some("body") })?;
    let request = QueryRequest {
        text: b.text,
        weights: b.weights.unwrap_or(defaults.weights),
        k: count("k", b.k, defaults.k, 1)?,
        n: count("n", b.n, defaults.n, 0)?,
        factor_mode: b.factor_mode.unwrap_or_default(),
        factor_filter: b.factor_filter,
        include_prompts: b.include_prompts.unwrap_or(false),
    };
    request.validate().map_err(|e| BadRequest { message: e.to_string(), field: e.field() })?;
    Ok(request)
}

fn pipeline_error(e: PipelineError) -> Response {
    let status = match &e {
        PipelineError::InvalidRequest { .. } | PipelineError::InvalidWeights(_) => StatusCode::BAD_REQUEST,
        PipelineError::AnalyzerUnavailable | PipelineError::EmptyCorpus => StatusCode::SERVICE_UNAVAILABLE,
        PipelineError::Analyzer(_) | PipelineError::Index(_) => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    error(status, e.to_string(), e.field())
}

async fn query(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let Some(engine) = state.engine() else {
        return not_loaded();
    };
    let request = match to_request(&body, state.defaults()) {
        Ok(r) => r,
        Err(bad) => return bad.into(),
    };
    match tokio::task::spawn_blocking(move || engine.retrieve(&request)).await {
        Ok(Ok(resp)) => json(StatusCode::OK, &resp),
        Ok(Err(e)) => pipeline_error(e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None),
    }
}
