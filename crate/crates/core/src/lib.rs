//! Structured retrieval over legal precedent.

pub mod citation;
pub mod fixtures;
pub mod graph;
pub mod index;
pub mod ingest;
pub mod pipeline;
pub mod ranking;
pub mod rerank;
