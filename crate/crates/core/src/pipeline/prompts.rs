//! Prompt templates for passage extraction and case analysis. Only the
//! text is assembled here; sending it to a model is up to the caller.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::graph::{CaseNode, Factor, FactorPassage, OpinionKind, OpinionNode};

use super::PipelineError;

fn section_description(f: Factor) -> &'static str {
    match f {
        Factor::Facts => "the factual background of the dispute",
        Factor::Purpose => "the purpose and character of the use",
        Factor::Nature => "the nature of the copyrighted work",
        Factor::Amount => "the amount and substantiality of the portion used",
        Factor::Market => "the effect of the use upon the potential market",
        Factor::Conclusion => "how the court weighed the factors to reach its holding",
    }
}

/// Asks for verbatim paragraphs of `opinion` for each of the six sections.
pub fn build_factor_extraction_prompt(opinion: &OpinionNode) -> String {
    let mut p = String::new();
    p.push_str(
        "You are reading a judicial opinion in a copyright fair use case.\n\
         Extract the paragraphs that discuss each section listed below.\n\
         Return direct quotations copied verbatim from the opinion text. \
         Do not paraphrase or summarize. If a section is not discussed, answer \"none\".\n\n\
         Sections:\n",
    );
    for f in Factor::ALL {
        let _ = writeln!(p, "- {}: {}", f, section_description(f));
    }
    let _ = write!(
        p,
        "\nAnswer with one heading per section, in the order above.\n\n\
         Opinion {} ({}):\n<<<\n{}\n>>>\n",
        opinion.opinion_id, kind_label(opinion.opinion_kind), opinion.full_text
    );
    p
}

/// Asks for the four factor sub-queries of a dispute as a JSON object.
pub fn build_factor_analysis_prompt(dispute: &str) -> String {
    format!(
        "A content creator describes the following copyright dispute.\n<<<\n{dispute}\n>>>\n\n\
         Think step by step about how the dispute relates to each of the four fair use factors. \
         Then write, for each factor, a short search query that would find precedent relevant to \
         that factor.\nAnswer with a single JSON object with the string fields \
         \"purpose\", \"nature\", \"amount\", \"market\" and \"rationale\".\n"
    )
}

/// Interleaves the dispute with one precedent's passages, factor by factor.
/// Sections without passages are marked "not extracted".
pub fn build_case_analysis_prompt(dispute: &str, case: &CaseNode, passages: &[&FactorPassage]) -> String {
    let mut p = String::new();
    let _ = write!(
        p,
        "Dispute:\n<<<\n{dispute}\n>>>\n\n\
         Precedent: {} ({}, {})\n\n\
         Analyze step by step how this precedent applies to the dispute, one factor at a time. \
         Compare the facts first, then each factor, then state what the court's conclusion \
         suggests for the dispute. Quote the precedent where you rely on it.\n",
        case.name, case.court_id, case.year
    );
    for f in Factor::ALL {
        let _ = writeln!(p, "\n## {f}");
        let texts: Vec<&str> = passages.iter().filter(|x| x.factor == f).map(|x| x.text.as_str()).collect();
        if texts.is_empty() {
            p.push_str("(not extracted)\n");
        }
        for t in texts {
            let _ = writeln!(p, "> {t}");
        }
    }
    p
}

/// One precedent's analysis, as fed to the synthesis prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseAnalysis {
    pub case_name: String,
    pub analysis: String,
}

/// Combines per-case analyses, in rank order, into a request for a
/// structured four-factor evaluation.
pub fn build_synthesis_prompt(dispute: &str, analyses: &[CaseAnalysis]) -> Result<String, PipelineError> {
    if analyses.is_empty() {
        return Err(PipelineError::EmptyInput("no case analyses to synthesize".into()));
    }
    let mut p = String::new();
    let _ = write!(p, "Dispute:\n<<<\n{dispute}\n>>>\n\nAnalyses of precedent, most relevant first:\n");
    for (i, a) in analyses.iter().enumerate() {
        let _ = write!(p, "\n### Case {}: {}\n{}\n", i + 1, a.case_name, a.analysis.trim_end());
    }
    p.push_str("\nWrite a structured fair use evaluation of the dispute with one section per factor:\n");
    for f in Factor::STATUTORY {
        let _ = writeln!(p, "- {f}: {}", section_description(f));
    }
    p.push_str("Close with an overall conclusion and cite the cases above that support each point.\n");
    Ok(p)
}

fn kind_label(kind: OpinionKind) -> &'static str {
    match kind {
        OpinionKind::Majority => "majority",
        OpinionKind::Concurrence => "concurrence",
        OpinionKind::Dissent => "dissent",
        OpinionKind::Appellate => "appellate",
    }
}
