use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::graph::Factor;

use super::PipelineError;

/// Retrieval sub-queries for the four statutory factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorAnalysis {
    pub sub_queries: BTreeMap<Factor, String>,
    pub rationale: String,
}

impl FactorAnalysis {
    pub fn validate(&self) -> Result<(), PipelineError> {
        for f in Factor::STATUTORY {
            match self.sub_queries.get(&f) {
                Some(q) if !q.trim().is_empty() => {}
                _ => return Err(PipelineError::Analyzer(format!("missing sub-query for {f}"))),
            }
        }
        if self.sub_queries.len() != Factor::STATUTORY.len() {
            return Err(PipelineError::Analyzer(
                "sub-queries must cover exactly Purpose, Nature, Amount and Market".into(),
            ));
        }
        Ok(())
    }
}

pub trait FactorAnalyzer: Send + Sync {
    fn analyze(&self, text: &str) -> Result<FactorAnalysis, PipelineError>;
}

/// Keywords appended to the dispute text for each factor's sub-query.
pub const FACTOR_TEMPLATES: [(Factor, &str); 4] = [
    (
        Factor::Purpose,
        "purpose and character of the use transformative commercial nonprofit parody criticism commentary",
    ),
    (
        Factor::Nature,
        "nature of the copyrighted work creative expressive factual published unpublished",
    ),
    (
        Factor::Amount,
        "amount and substantiality of the portion used heart of the work copied entire",
    ),
    (
        Factor::Market,
        "effect of the use upon the potential market value licensing substitute harm",
    ),
];

/// Deterministic analyzer: each sub-query is the dispute text followed by a
/// fixed keyword template for the factor.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateAnalyzer;

impl FactorAnalyzer for TemplateAnalyzer {
    fn analyze(&self, text: &str) -> Result<FactorAnalysis, PipelineError> {
        if text.trim().is_empty() {
            return Err(PipelineError::InvalidRequest {
                field: "text",
                message: "must not be empty".into(),
            });
        }
        let sub_queries = FACTOR_TEMPLATES
            .iter()
            .map(|(f, template)| (*f, format!("{text} {template}")))
            .collect();
        Ok(FactorAnalysis {
            sub_queries,
            rationale: "dispute text combined with fixed keywords for each factor".into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("completion failed: {0}")]
pub struct CompletionError(pub String);

/// Text completion backend.
pub trait CompletionClient: Send + Sync {
    fn endpoint(&self) -> &str;

    fn complete(&self, prompt: &str) -> Result<String, CompletionError>;
}

/// Analyzer that asks a completion model for the sub-queries.
#[derive(Clone, Default)]
pub struct LlmAnalyzer {
    client: Option<Arc<dyn CompletionClient>>,
}

impl LlmAnalyzer {
    pub fn new(client: Option<Arc<dyn CompletionClient>>) -> Self {
        Self { client }
    }
}

impl std::fmt::Debug for LlmAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmAnalyzer")
            .field("endpoint", &self.client.as_ref().map(|c| c.endpoint().to_owned()))
            .finish()
    }
}

#[derive(Deserialize)]
struct AnalysisReply {
    purpose: String,
    nature: String,
    amount: String,
    market: String,
    #[serde(default)]
    rationale: String,
}

impl FactorAnalyzer for LlmAnalyzer {
    fn analyze(&self, text: &str) -> Result<FactorAnalysis, PipelineError> {
        let client = self.client.as_ref().ok_or(PipelineError::AnalyzerUnavailable)?;
        let reply = client
            .complete(&super::prompts::build_factor_analysis_prompt(text))
            .map_err(|e| PipelineError::Analyzer(e.to_string()))?;
        let json = match (reply.find('{'), reply.rfind('}')) {
            (Some(a), Some(b)) if a < b => &reply[a..=b],
            _ => return Err(PipelineError::Analyzer("reply contains no JSON object".into())),
        };
        let parsed: AnalysisReply =
            serde_json::from_str(json).map_err(|e| PipelineError::Analyzer(e.to_string()))?;
        let analysis = FactorAnalysis {
            sub_queries: [
                (Factor::Purpose, parsed.purpose),
                (Factor::Nature, parsed.nature),
                (Factor::Amount, parsed.amount),
                (Factor::Market, parsed.market),
            ]
            .into_iter()
            .collect(),
            rationale: parsed.rationale,
        };
        analysis.validate()?;
        Ok(analysis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_contract() {
        let text = "A parody video reused the chorus of a pop song.";
        let a = TemplateAnalyzer.analyze(text).unwrap();
        assert!(a.validate().is_ok());
        assert_eq!(a.sub_queries.len(), 4);
        for q in a.sub_queries.values() {
            assert!(q.contains(text));
        }
        assert!(a.sub_queries[&Factor::Purpose].contains("transformative"));
        assert!(a.sub_queries[&Factor::Purpose].contains("parody criticism commentary"));
        assert_eq!(a, TemplateAnalyzer.analyze(text).unwrap());
    }

    #[test]
    fn llm_without_endpoint_is_unavailable() {
        assert!(matches!(LlmAnalyzer::new(None).analyze("x"), Err(PipelineError::AnalyzerUnavailable)));
    }

    struct Canned(&'static str);

    impl CompletionClient for Canned {
        fn endpoint(&self) -> &str {
            "canned"
        }
        fn complete(&self, _: &str) -> Result<String, CompletionError> {
            Ok(self.0.to_owned())
        }
    }

    #[test]
    fn llm_reply_parsing() {
        let ok = LlmAnalyzer::new(Some(Arc::new(Canned(
            "Here you go:\n{\"purpose\":\"p\",\"nature\":\"n\",\"amount\":\"a\",\"market\":\"m\",\"rationale\":\"r\"}",
        ))));
        let a = ok.analyze("dispute").unwrap();
        assert_eq!(a.sub_queries[&Factor::Market], "m");
        let bad = LlmAnalyzer::new(Some(Arc::new(Canned("{\"purpose\":\"\",\"nature\":\"n\",\"amount\":\"a\",\"market\":\"m\"}"))));
        assert!(matches!(bad.analyze("dispute"), Err(PipelineError::Analyzer(_))));
        let none = LlmAnalyzer::new(Some(Arc::new(Canned("no idea"))));
        assert!(matches!(none.analyze("dispute"), Err(PipelineError::Analyzer(_))));
    }
}
