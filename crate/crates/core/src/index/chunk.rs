use serde::{Deserialize, Serialize};

use crate::graph::{Factor, FactorPassage, KnowledgeGraph, PassageId};

use super::ChunkId;

pub const DEFAULT_MAX_TOKENS: usize = 256;
pub const MIN_MAX_TOKENS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: ChunkId,
    pub passage_id: PassageId,
    pub factor: Factor,
    pub text: String,
    pub token_estimate: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChunkDiagnostic {
    /// A single sentence exceeded the limit and became its own chunk.
    OversizedSentence {
        chunk_id: ChunkId,
        tokens: usize,
        max_tokens: usize,
    },
}

/// Whitespace token count.
pub fn estimate_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

const ABBREVIATIONS: &[&str] = &[
    "v.", "vs.", "inc.", "corp.", "co.", "ltd.", "no.", "nos.", "cir.", "ct.", "supp.", "f.",
    "ed.", "app.", "id.", "cf.", "e.g.", "i.e.", "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.",
    "sec.", "art.", "para.", "p.", "pp.", "dist.", "cal.", "rev.", "stat.", "ann.", "enters.",
    "bros.", "ass'n.", "int'l.", "dep't.", "univ.", "mfg.", "n.y.", "u.s.", "u.s.c.", "l.",
];

fn is_abbreviation(word: &str) -> bool {
    let w = word.trim_start_matches(['(', '"', '\'', '“', '‘', '[']);
    let lower = w.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // Initials and dotted acronyms: "J.", "U.S.", "D.C."
    let letters: Vec<char> = w.chars().collect();
    letters.len() >= 2
        && letters
            .chunks(2)
            .all(|p| p.len() == 2 && p[0].is_alphabetic() && p[1] == '.')
}

/// Byte ranges of the sentences in `text`, trimmed of surrounding whitespace.
pub fn split_sentences(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut word_start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            word_start = i + c.len_utf8();
            continue;
        }
        if start.is_none() {
            start = Some(i);
        }
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let mut end = i + c.len_utf8();
        while let Some(&(j, q)) = chars.peek() {
            if matches!(q, '"' | '\'' | '”' | '’' | ')' | ']' | '.' | '!' | '?') {
                end = j + q.len_utf8();
                chars.next();
            } else {
                break;
            }
        }
        let rest = &text[end..];
        let Some(after) = rest.chars().next() else {
            continue;
        };
        if !after.is_whitespace() {
            continue;
        }
        let next_visible = rest.trim_start().chars().next();
        let opens_sentence = next_visible.is_none_or(|n| {
            n.is_uppercase() || n.is_ascii_digit() || matches!(n, '"' | '“' | '(' | '[' | '§')
        });
        if c == '.' && is_abbreviation(&text[word_start..end]) {
            continue;
        }
        if opens_sentence {
            out.push((start.take().expect("set above"), end));
        }
    }
    if let Some(s) = start {
        let end = text.trim_end().len();
        if end > s {
            out.push((s, end));
        }
    }
    out
}

/// Packs whole sentences greedily into chunks of at most `max_tokens`
/// estimated tokens. Values below [`MIN_MAX_TOKENS`] are raised to it.
pub fn chunk_passage(passage: &FactorPassage, max_tokens: usize) -> (Vec<Chunk>, Vec<ChunkDiagnostic>) {
    let max_tokens = max_tokens.max(MIN_MAX_TOKENS);
    let text = passage.text.as_str();
    let mut chunks = Vec::new();
    let mut diagnostics = Vec::new();
    let mut current: Option<(usize, usize, usize)> = None;

    let flush = |span: (usize, usize, usize), chunks: &mut Vec<Chunk>| {
        let (s, e, tokens) = span;
        chunks.push(Chunk {
            chunk_id: ChunkId(format!("{}#{:04}", passage.passage_id, chunks.len())),
            passage_id: passage.passage_id.clone(),
            factor: passage.factor,
            text: text[s..e].to_owned(),
            token_estimate: tokens,
        });
    };

    for (s, e) in split_sentences(text) {
        let tokens = estimate_tokens(&text[s..e]);
        current = match current {
            Some((cs, _, ct)) if ct + tokens <= max_tokens => Some((cs, e, ct + tokens)),
            Some(span) => {
                flush(span, &mut chunks);
                Some((s, e, tokens))
            }
            None => Some((s, e, tokens)),
        };
        if tokens > max_tokens {
            flush(current.take().expect("just set"), &mut chunks);
            diagnostics.push(ChunkDiagnostic::OversizedSentence {
                chunk_id: chunks.last().expect("just pushed").chunk_id.clone(),
                tokens,
                max_tokens,
            });
        }
    }
    if let Some(span) = current {
        flush(span, &mut chunks);
    }
    (chunks, diagnostics)
}

/// Chunks every passage of `graph`, in passage id order.
pub fn chunk_graph(graph: &KnowledgeGraph, max_tokens: usize) -> (Vec<Chunk>, Vec<ChunkDiagnostic>) {
    let mut chunks = Vec::new();
    let mut diagnostics = Vec::new();
    for passage in graph.passages() {
        let (c, d) = chunk_passage(passage, max_tokens);
        chunks.extend(c);
        diagnostics.extend(d);
    }
    (chunks, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn passage(text: &str) -> FactorPassage {
        FactorPassage {
            passage_id: "p1".into(),
            opinion_id: "o1".into(),
            factor: Factor::Purpose,
            text: text.into(),
        }
    }

    fn sentences(text: &str) -> Vec<&str> {
        split_sentences(text).into_iter().map(|(s, e)| &text[s..e]).collect()
    }

    #[test]
    fn legal_abbreviations_do_not_split() {
        let text = "In Campbell v. Acuff-Rose Music, Inc., 510 U.S. 569 (1994), the Court held so. The Ninth Cir. agreed. Parody is \"transformative.\" Next one?";
        assert_eq!(
            sentences(text),
            vec![
                "In Campbell v. Acuff-Rose Music, Inc., 510 U.S. 569 (1994), the Court held so.",
                "The Ninth Cir. agreed.",
                "Parody is \"transformative.\"",
                "Next one?",
            ]
        );
    }

    #[test]
    fn lowercase_continuation_is_not_a_boundary() {
        assert_eq!(sentences("See id. at 5. It follows."), vec!["See id. at 5.", "It follows."]);
        assert_eq!(sentences("approx. ten copies were made."), vec!["approx. ten copies were made."]);
    }

    #[test]
    fn single_sentence_single_chunk() {
        let (chunks, diags) = chunk_passage(&passage("The use was transformative."), 256);
        assert_eq!(chunks.len(), 1);
        assert!(diags.is_empty());
        assert_eq!(chunks[0].chunk_id, "p1#0000");
        assert_eq!(chunks[0].token_estimate, 4);
    }

    #[test]
    fn ten_equal_sentences_pack_three_per_chunk() {
        // Ten tokens per sentence; a 32-token limit fits three (30) but not four (40).
        let sentence = "The defendant copied one two three four five six seven.";
        assert_eq!(estimate_tokens(sentence), 10);
        let text = [sentence; 10].join(" ");
        let (chunks, diags) = chunk_passage(&passage(&text), 32);
        let sizes: Vec<usize> = chunks.iter().map(|c| c.token_estimate / 10).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
        assert!(diags.is_empty());
    }

    #[test]
    fn oversized_sentence_kept_whole() {
        let long = format!("Word {}.", vec!["word"; 39].join(" "));
        let text = format!("Short one. {long} Tail here.");
        let (chunks, diags) = chunk_passage(&passage(&text), 32);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[1].text, long);
        assert_eq!(
            diags,
            vec![ChunkDiagnostic::OversizedSentence { chunk_id: "p1#0001".into(), tokens: 40, max_tokens: 32 }]
        );
    }

    proptest! {
        #[test]
        fn chunks_reconstruct_passage(
            words in prop::collection::vec("[A-Za-z]{1,8}", 1..200),
            breaks in prop::collection::vec(any::<bool>(), 200),
            max in 32usize..80,
        ) {
            let mut text = String::new();
            for (i, w) in words.iter().enumerate() {
                if i > 0 { text.push(' '); }
                text.push_str(w);
                if breaks[i] { text.push('.'); }
            }
            let (chunks, diags) = chunk_passage(&passage(&text), max);
            let joined = chunks.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join(" ");
            let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
            prop_assert_eq!(norm(&joined), norm(&text));
            for c in &chunks {
                let oversized = diags.iter().any(|d| matches!(d, ChunkDiagnostic::OversizedSentence { chunk_id, .. } if *chunk_id == c.chunk_id));
                prop_assert!(c.token_estimate <= max || oversized);
                prop_assert!(!c.text.trim().is_empty());
            }
        }
    }
}
