//! HTTP service over the retrieval engine.

mod app;
mod config;
mod remote;

pub use app::{router, AppState, QueryDefaults, MAX_RESULTS};
pub use config::{ConfigError, EmbedderMode, ServerConfig, ENV_PREFIX};
pub use remote::{HttpCompletionClient, HttpEmbedder};

use std::path::Path;
use std::sync::Arc;

use precedent_core::citation::CitationExtractor;
use precedent_core::index::{Embedder, ReferenceEmbedder};
use precedent_core::ingest::{ingest_path, IngestError, IngestReport};
use precedent_core::pipeline::{Engine, EngineConfig, LlmAnalyzer, PipelineError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{path}: corpus has {} schema violation(s); first: {}", .report.violations.len(), .report.violations.first().map(|v| format!("{}:{}: {}", v.source, v.line, v.message)).unwrap_or_default())]
    Violations { path: String, report: Box<IngestReport> },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

pub fn make_embedder(mode: EmbedderMode, endpoint: Option<&str>, dimension: usize) -> Arc<dyn Embedder> {
    match (mode, endpoint) {
        (EmbedderMode::Http, Some(url)) => Arc::new(HttpEmbedder::new(url, dimension)),
        _ => Arc::new(ReferenceEmbedder::new(dimension)),
    }
}

/// Loads a store file or corpus directory and builds a ready engine.
pub fn load_engine(path: &Path, config: &ServerConfig) -> Result<Engine, LoadError> {
    let ingested = ingest_path(path, &CitationExtractor::default())?;
    let Some(graph) = ingested.graph else {
        return Err(LoadError::Violations { path: path.display().to_string(), report: Box::new(ingested.report) });
    };
    let embedder = make_embedder(config.embedder, config.embedder_endpoint.as_deref(), config.embedder_dimension);
    let engine_config = EngineConfig { pool_size: config.pool_size, ..EngineConfig::default() };
    let engine = Engine::build(graph, embedder, &engine_config)?;
    Ok(match &config.completion_endpoint {
        Some(url) => engine.with_analyzer(Arc::new(LlmAnalyzer::new(Some(Arc::new(HttpCompletionClient::new(url)))))),
        None => engine,
    })
}

pub fn defaults(config: &ServerConfig) -> QueryDefaults {
    QueryDefaults { weights: config.weights, k: config.k, n: config.n }
}

/// Binds `config.bind`, loads the configured corpus if any, and serves
/// until interrupted.
pub async fn serve(config: ServerConfig) -> Result<(), ServeError> {
    let state = Arc::new(AppState::new(defaults(&config)));
    if let Some(path) = config.corpus.clone() {
        let cfg = config.clone();
        let engine = tokio::task::spawn_blocking(move || load_engine(&path, &cfg))
            .await
            .map_err(|e| ServeError::Io(std::io::Error::other(e)))??;
        state.install(engine);
    }
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

/// Runs [`serve`] on a new multi-threaded runtime.
pub fn serve_blocking(config: ServerConfig) -> Result<(), ServeError> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(serve(config))
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
