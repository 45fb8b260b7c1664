use std::path::{Path, PathBuf};

use precedent_core::pipeline::{DEFAULT_K, DEFAULT_N, DEFAULT_POOL_SIZE};
use precedent_core::rerank::Weights;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{name}: {message}")]
    Env { name: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderMode {
    #[default]
    Reference,
    Http,
}

impl std::str::FromStr for EmbedderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reference" => Ok(EmbedderMode::Reference),
            "http" => Ok(EmbedderMode::Http),
            other => Err(format!("unknown embedder mode {other:?}; expected reference or http")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    /// Store file or corpus directory loaded at startup.
    pub corpus: Option<PathBuf>,
    pub bind: String,
    pub embedder: EmbedderMode,
    /// Required for the http embedder.
    pub embedder_endpoint: Option<String>,
    pub embedder_dimension: usize,
    /// Enables the model-backed factor analyzer.
    pub completion_endpoint: Option<String>,
    pub weights: Weights,
    pub k: usize,
    pub n: usize,
    pub pool_size: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            bind: "127.0.0.1:8080".into(),
            embedder: EmbedderMode::Reference,
            embedder_endpoint: None,
            embedder_dimension: precedent_core::index::DEFAULT_DIMENSION,
            completion_endpoint: None,
            weights: Weights::default(),
            k: DEFAULT_K,
            n: DEFAULT_N,
            pool_size: DEFAULT_POOL_SIZE,
        }
    }
}

pub const ENV_PREFIX: &str = "PRECEDENT_";

impl ServerConfig {
    /// Reads the optional TOML file, then applies `PRECEDENT_*` variables
    /// from the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        Self::load_with(path, |k| std::env::var(k).ok())
    }

    pub fn load_with(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.into(), source })?;
                toml::from_str(&text).map_err(|source| ConfigError::Parse { path: p.into(), source })?
            }
            None => ServerConfig::default(),
        };
        cfg.apply_env(env)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        let get = |name: &str| env(&format!("{ENV_PREFIX}{name}")).filter(|v| !v.trim().is_empty());
        fn parse<T: std::str::FromStr>(name: &str, v: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            v.trim().parse().map_err(|e: T::Err| ConfigError::Env {
                name: format!("{ENV_PREFIX}{name}"),
                message: e.to_string(),
            })
        }
        if let Some(v) = get("CORPUS") {
            self.corpus = Some(v.into());
        }
        if let Some(v) = get("BIND") {
            self.bind = v;
        }
        if let Some(v) = get("EMBEDDER") {
            self.embedder = parse("EMBEDDER", &v)?;
        }
        if let Some(v) = get("EMBEDDER_ENDPOINT") {
            self.embedder_endpoint = Some(v);
        }
        if let Some(v) = get("EMBEDDER_DIMENSION") {
            self.embedder_dimension = parse("EMBEDDER_DIMENSION", &v)?;
        }
        if let Some(v) = get("COMPLETION_ENDPOINT") {
            self.completion_endpoint = Some(v);
        }
        if let Some(v) = get("W_TEXT") {
            self.weights.w_text = parse("W_TEXT", &v)?;
        }
        if let Some(v) = get("W_CIT") {
            self.weights.w_cit = parse("W_CIT", &v)?;
        }
        if let Some(v) = get("W_COURT") {
            self.weights.w_court = parse("W_COURT", &v)?;
        }
        if let Some(v) = get("K") {
            self.k = parse("K", &v)?;
        }
        if let Some(v) = get("N") {
            self.n = parse("N", &v)?;
        }
        if let Some(v) = get("POOL_SIZE") {
            self.pool_size = parse("POOL_SIZE", &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.weights.validate().map_err(|e| ConfigError::Invalid { field: "weights", message: e.to_string() })?;
        if self.k == 0 {
            return Err(ConfigError::Invalid { field: "k", message: "must be at least 1".into() });
        }
        if self.pool_size == 0 {
            return Err(ConfigError::Invalid { field: "pool_size", message: "must be at least 1".into() });
        }
        if self.embedder == EmbedderMode::Http && self.embedder_endpoint.is_none() {
            return Err(ConfigError::Invalid {
                field: "embedder_endpoint",
                message: "required when embedder = \"http\"".into(),
            });
        }
        if self.embedder_dimension < 2 {
            return Err(ConfigError::Invalid { field: "embedder_dimension", message: "must be at least 2".into() });
        }
        Ok(())
    }
}
