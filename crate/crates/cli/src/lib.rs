//! Command-line entry points: ingest, rank, stats, query, serve, export.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use precedent_core::citation::CitationExtractor;
use precedent_core::graph::{self, KnowledgeGraph};
use precedent_core::ingest::ingest_path;
use precedent_core::pipeline::{Engine, EngineConfig, FactorMode, QueryRequest, QueryResponse};
use precedent_core::ranking::{influence_distribution, AuthorityScores, PageRankConfig, DEFAULT_BINS_PER_DECADE};
use precedent_core::rerank::Weights;
use precedent_server::{make_embedder, EmbedderMode, ServerConfig};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "precedent", version, about = "Precedent retrieval ranked by text, citation and court authority")]
pub struct Cli {
    /// Print JSON instead of plain-text tables.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus directory and write a store plus a report.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Report path; defaults to the store path with `.report.json` appended.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compute citation and court authority scores.
    Rank {
        #[arg(long)]
        store: PathBuf,
        /// Scores file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-tier influence histogram here.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Summarize corpus size and coverage.
    Stats {
        #[arg(long)]
        store: PathBuf,
    },
    /// Rank precedents for a dispute description.
    Query {
        #[arg(long)]
        store: PathBuf,
        /// Dispute description.
        text: String,
        #[command(flatten)]
        retrieval: RetrievalArgs,
        /// whole_query or per_factor.
        #[arg(long)]
        factor_mode: Option<FactorMode>,
        #[command(flatten)]
        embedder: EmbedderArgs,
    },
    /// Run the HTTP service.
    Serve {
        /// Store file or corpus directory.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
        /// TOML configuration file; PRECEDENT_* variables and flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        retrieval: RetrievalArgs,
        #[command(flatten)]
        embedder: EmbedderArgs,
    },
    /// Write the store back out as corpus records.
    Export {
        #[arg(long)]
        store: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Retrieval settings. When any weight is given the others default to 0.
#[derive(Debug, Clone, Default, Args)]
pub struct RetrievalArgs {
    #[arg(long)]
    pub w_text: Option<f64>,
    #[arg(long)]
    pub w_cit: Option<f64>,
    #[arg(long)]
    pub w_court: Option<f64>,
    /// Number of ranked results.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of citation expansions.
    #[arg(long)]
    pub n: Option<usize>,
}

impl RetrievalArgs {
    fn weights(&self) -> Option<Weights> {
        if self.w_text.is_none() && self.w_cit.is_none() && self.w_court.is_none() {
            return None;
        }
        Some(Weights {
            w_text: self.w_text.unwrap_or(0.0),
            w_cit: self.w_cit.unwrap_or(0.0),
            w_court: self.w_court.unwrap_or(0.0),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct EmbedderArgs {
    /// reference or http.
    #[arg(long)]
    pub embedder: Option<EmbedderMode>,
    /// Embedding service URL for the http embedder.
    #[arg(long)]
    pub embedder_endpoint: Option<String>,
    #[arg(long)]
    pub embedder_dimension: Option<usize>,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or flag combinations.
    Usage(String),
    /// Missing or invalid input data.
    Data(String),
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest { corpus, store, report } => ingest(&corpus, &store, report, cli.json, out),
        Command::Rank { store, out: path, histogram } => rank(&store, path.as_deref(), histogram.as_deref(), out),
        Command::Stats { store } => stats(&store, cli.json, out),
        Command::Query { store, text, retrieval, factor_mode, embedder } => {
            query(&store, text, &retrieval, factor_mode.unwrap_or_default(), &embedder, cli.json, out)
        }
        Command::Serve { store, bind, config, retrieval, embedder } => {
            serve(store, bind, config.as_deref(), &retrieval, &embedder)
        }
        Command::Export { store, out: path } => {
            let g = load_store(&store)?;
            with_output(path.as_deref(), out, |w| graph::export(&g, w).map_err(data))
        }
    }
}

/// Writes to `path` when given, otherwise to `out`.
fn with_output(
    path: Option<&Path>,
    out: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<(), Failure>,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| data(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| data(format!("{}: {e}", p.display())))
        }
        None => f(out),
    }
}

pub fn load_store(path: &Path) -> Result<KnowledgeGraph, Failure> {
    let file = File::open(path).map_err(|e| data(format!("cannot open store {}: {e}", path.display())))?;
    graph::import(BufReader::new(file)).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn ingest(corpus: &Path, store: &Path, report: Option<PathBuf>, json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let report_path = report.unwrap_or_else(|| {
        let mut s = store.as_os_str().to_owned();
        s.push(".report.json");
        PathBuf::from(s)
    });
    let write_report = |value: &serde_json::Value| {
        let text = serde_json::to_string_pretty(value).map_err(data)?;
        std::fs::write(&report_path, text + "\n").map_err(|e| data(format!("{}: {e}", report_path.display())))
    };
    if !corpus.is_dir() {
        let msg = format!("{}: not a corpus directory", corpus.display());
        write_report(&json!({ "error": msg }))?;
        return Err(Failure::Data(msg));
    }
    let ingested = match ingest_path(corpus, &CitationExtractor::default()) {
        Ok(i) => i,
        Err(e) => {
            write_report(&json!({ "error": e.to_string() }))?;
            return Err(data(e));
        }
    };
    let report = &ingested.report;
    write_report(&serde_json::to_value(report).map_err(data)?)?;
    let Some(g) = ingested.graph else {
        let first = report.violations.first().map(|v| format!("{}:{}: {}", v.source, v.line, v.message));
        return Err(Failure::Data(format!(
            "{} schema violation(s), first {}; see {}",
            report.violations.len(),
            first.unwrap_or_default(),
            report_path.display()
        )));
    };
    with_output(Some(store), out, |w| graph::export(&g, w).map_err(data))?;
    if json {
        writeln!(out, "{}", serde_json::to_string(report).map_err(data)?).map_err(data)?;
    } else {
        let s = g.corpus_stats();
        writeln!(
            out,
            "ingested {} records from {} file(s): {} cases, {} opinions, {} courts, {} passages, {} citations",
            report.records,
            report.files.len(),
            s.case_count,
            s.opinion_count,
            s.court_count,
            s.passage_count,
            s.citation_count
        )
        .map_err(data)?;
        writeln!(
            out,
            "{} citation(s) recovered from opinion text, {} unresolved, {} court(s) auto-created",
            report.derived_citations,
            report.unresolved_citations.len(),
            report.auto_created_courts.len()
        )
        .map_err(data)?;
        writeln!(out, "store: {}\nreport: {}", store.display(), report_path.display()).map_err(data)?;
    }
    Ok(())
}

fn rank(store: &Path, path: Option<&Path>, histogram: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let g = load_store(store)?;
    let scores = AuthorityScores::compute(&g, &PageRankConfig::default()).map_err(data)?;
    with_output(path, out, |w| {
        for (scope, records) in [("case", scores.citation_records()), ("court", scores.court_records())] {
            for r in records {
                let line = json!({ "scope": scope, "id": r.id, "raw": r.raw, "scaled": r.scaled });
                writeln!(w, "{line}").map_err(data)?;
            }
        }
        Ok(())
    })?;
    if let Some(p) = histogram {
        let mut sink = std::io::sink();
        with_output(Some(p), &mut sink, |w| {
            for bin in influence_distribution(&g, &scores.citation_rank, DEFAULT_BINS_PER_DECADE) {
                writeln!(w, "{}", serde_json::to_string(&bin).map_err(data)?).map_err(data)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn stats(store: &Path, json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let s = load_store(store)?.corpus_stats();
    if json {
        return writeln!(out, "{}", serde_json::to_string(&s).map_err(data)?).map_err(data);
    }
    let years = match (s.year_min, s.year_max) {
        (Some(a), Some(b)) => format!("{a}-{b}"),
        _ => "none".into(),
    };
    let rows = [
        ("Total number of cases", s.case_count.to_string()),
        ("Total number of opinions", s.opinion_count.to_string()),
        ("Number of courts", s.court_count.to_string()),
        ("Factor passages", s.passage_count.to_string()),
        ("Citation edges", s.citation_count.to_string()),
        ("Years", years),
    ];
    for (label, value) in rows {
        writeln!(out, "{label:<26}{value}").map_err(data)?;
    }
    Ok(())
}

fn embedder_settings(args: &EmbedderArgs, cfg: &mut ServerConfig) {
    if let Some(m) = args.embedder {
        cfg.embedder = m;
    }
    if let Some(e) = &args.embedder_endpoint {
        cfg.embedder_endpoint = Some(e.clone());
    }
    if let Some(d) = args.embedder_dimension {
        cfg.embedder_dimension = d;
    }
}

fn retrieval_settings(args: &RetrievalArgs, cfg: &mut ServerConfig) {
    if let Some(w) = args.weights() {
        cfg.weights = w;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
}

fn usage(e: precedent_server::ConfigError) -> Failure {
    Failure::Usage(e.to_string())
}

fn query(
    store: &Path,
    text: String,
    retrieval: &RetrievalArgs,
    factor_mode: FactorMode,
    embedder: &EmbedderArgs,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let mut cfg = ServerConfig::default();
    retrieval_settings(retrieval, &mut cfg);
    embedder_settings(embedder, &mut cfg);
    cfg.validate().map_err(usage)?;
    let request = QueryRequest {
        factor_mode,
        ..QueryRequest::new(text).with_weights(cfg.weights).with_k(cfg.k).with_n(cfg.n)
    };
    request.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let g = load_store(store)?;
    let emb = make_embedder(cfg.embedder, cfg.embedder_endpoint.as_deref(), cfg.embedder_dimension);
    let engine = Engine::build(g, emb, &EngineConfig { pool_size: cfg.pool_size, ..EngineConfig::default() })
        .map_err(data)?;
    let resp = engine.retrieve(&request).map_err(data)?;
    if json {
        writeln!(out, "{}", serde_json::to_string(&resp).map_err(data)?).map_err(data)
    } else {
        print_table(&resp, out).map_err(data)
    }
}

fn print_table(resp: &QueryResponse, out: &mut dyn Write) -> std::io::Result<()> {
    let w = resp.weights;
    writeln!(
        out,
        "weights text={} citation={} court={}, {} candidates",
        w.w_text, w.w_cit, w.w_court, resp.candidate_count
    )?;
    writeln!(out, "{:>4}  {:>7}  {:>7}  {:>8}  {:>7}  {:>4}  case", "rank", "fused", "text", "citation", "court", "year")?;
    for r in &resp.results {
        let s = &r.scores;
        writeln!(
            out,
            "{:>4}  {:>7.4}  {:>7.4}  {:>8.4}  {:>7.4}  {:>4}  {}",
            r.rank, s.fused, s.text_sim, s.citation, s.court, r.year, r.case_name
        )?;
    }
    if !resp.expansions.is_empty() {
        writeln!(out, "cited authorities:")?;
        for x in &resp.expansions {
            writeln!(out, "{:>4}  {:>7.4}  {} ({}), cited by {}", x.rank, x.score, x.case_name, x.year, x.source)?;
        }
    }
    Ok(())
}

fn serve(
    store: Option<PathBuf>,
    bind: Option<String>,
    config: Option<&Path>,
    retrieval: &RetrievalArgs,
    embedder: &EmbedderArgs,
) -> Result<(), Failure> {
    let mut cfg = ServerConfig::load(config).map_err(usage)?;
    if let Some(s) = store {
        if !s.exists() {
            return Err(Failure::Data(format!("store not found: {}", s.display())));
        }
        cfg.corpus = Some(s);
    }
    if let Some(b) = bind {
        cfg.bind = b;
    }
    retrieval_settings(retrieval, &mut cfg);
    embedder_settings(embedder, &mut cfg);
    cfg.validate().map_err(usage)?;
    precedent_server::serve_blocking(cfg).map_err(data)
}
