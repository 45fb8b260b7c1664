use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::ReporterRegistry;

/// Half-open range of character (not byte) offsets into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn shifted(self, by: usize) -> Span {
        Span {
            start: self.start + by,
            end: self.end + by,
        }
    }
}

/// A volume–reporter–page citation found in text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub volume: u32,
    /// Canonical reporter abbreviation from the registry.
    pub reporter: String,
    pub page: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub court_hint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_name_hint: Option<String>,
    pub span: Span,
}

impl Citation {
    /// `"801 F.3d 1126"`.
    pub fn reporter_string(&self) -> String {
        format!("{} {} {}", self.volume, self.reporter, self.page)
    }
}

/// Something that looks like a reporter citation but was not accepted:
/// an unregistered reporter or a zero volume/page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearMiss {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub citations: Vec<Citation>,
    pub near_misses: Vec<NearMiss>,
}

/// Compiled extractor for one registry.
#[derive(Debug, Clone)]
pub struct CitationExtractor {
    registry: ReporterRegistry,
    main: Regex,
}

// At least one blank, possibly wrapping onto the next line, never across a
// blank line.
const GAP: &str = r"(?:[ \t\u{a0}]+\n?|\n)[ \t\u{a0}]*";

fn pin_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^,[ \t]*\d{1,6}(?:[-–]\d{1,6})?").unwrap())
}

fn paren_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[ \t]*\(([^()\n]{0,80})\)").unwrap())
}

fn paren_year_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(.*?)[ \t]*\b(\d{4})$").unwrap())
}

fn near_miss_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"\b\d{1,5}[ \t]+(?:[A-Z][A-Za-z']*\.[ \t]?){1,4}(?:\d[a-z]{1,2}[ \t]+)?\d{1,6}\b",
        )
        .unwrap()
    })
}

fn blank_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\n[ \t]*\n").unwrap())
}

const SIGNALS: &[&str] = &[
    "See", "see", "See,", "Cf.", "cf.", "Accord", "accord", "Compare", "But", "Also", "E.g.,",
    "e.g.,", "Contra", "In", "Under", "Citing", "citing", "Quoting", "quoting",
];

const CONNECTORS: &[&str] = &["of", "the", "and", "&", "de", "ex", "rel.", "for", "in", "on", "to"];

impl CitationExtractor {
    pub fn new(registry: ReporterRegistry) -> Self {
        let pattern = format!(
            r"\b(?P<vol>\d{{1,5}}){GAP}(?P<rep>{alt}){GAP}(?P<page>\d{{1,6}})\b",
            alt = registry.alternation()
        );
        let main = Regex::new(&pattern).expect("registry alternation is a valid regex");
        Self { registry, main }
    }

    pub fn registry(&self) -> &ReporterRegistry {
        &self.registry
    }

    pub fn extract(&self, text: &str) -> Vec<Citation> {
        self.extract_with_diagnostics(text).citations
    }

    /// Scans `text` left to right. Citations come back in source order with
    /// non-overlapping spans.
    pub fn extract_with_diagnostics(&self, text: &str) -> Extraction {
        let mut offsets = CharOffsets::new(text);
        let mut out = Extraction::default();
        let mut accepted_bytes: Vec<(usize, usize)> = Vec::new();
        let mut pos = 0;
        let mut prev_end = 0;

        while let Some(caps) = self.main.captures_at(text, pos) {
            let whole = caps.get(0).expect("group 0");
            let start = whole.start();
            let mut end = whole.end();
            let volume: u32 = caps["vol"].parse().unwrap_or(0);
            let page: u32 = caps["page"].parse().unwrap_or(0);
            if volume == 0 || page == 0 {
                out.near_misses.push(NearMiss {
                    text: whole.as_str().to_owned(),
                    span: Span {
                        start: offsets.at(start),
                        end: offsets.at(end),
                    },
                });
                accepted_bytes.push((start, end));
                pos = end;
                continue;
            }
            let reporter = self
                .registry
                .canonical(&caps["rep"])
                .expect("matched forms are registered")
                .to_owned();

            // Pin cites, unless the digits begin the next citation.
            while let Some(pin) = pin_re().find(&text[end..]) {
                let digits_at = end + pin.as_str().find(|c: char| c.is_ascii_digit()).unwrap();
                if self
                    .main
                    .find_at(text, digits_at)
                    .is_some_and(|m| m.start() == digits_at)
                {
                    break;
                }
                end += pin.end();
            }

            let mut year = None;
            let mut court_hint = None;
            if let Some(paren) = paren_re().captures(&text[end..]) {
                let inner = paren[1].trim();
                if let Some(yc) = paren_year_re().captures(inner) {
                    year = yc[2].parse().ok();
                    let court = yc[1].trim();
                    if !court.is_empty() {
                        court_hint = Some(court.to_owned());
                    }
                    end += paren.get(0).unwrap().end();
                }
            }

            let case_name_hint = case_name_before(&text[prev_end..start]);
            out.citations.push(Citation {
                volume,
                reporter,
                page,
                year,
                court_hint,
                case_name_hint,
                span: Span {
                    start: offsets.at(start),
                    end: offsets.at(end),
                },
            });
            accepted_bytes.push((start, end));
            prev_end = end;
            pos = end;
        }

        let mut near: Vec<NearMiss> = near_miss_re()
            .find_iter(text)
            .filter(|m| {
                !accepted_bytes
                    .iter()
                    .any(|&(s, e)| m.start() < e && s < m.end())
            })
            .map(|m| (m.start(), m.end(), m.as_str().to_owned()))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|(s, e, t)| NearMiss {
                text: t,
                span: Span {
                    start: char_index(text, s),
                    end: char_index(text, e),
                },
            })
            .collect();
        out.near_misses.append(&mut near);
        out.near_misses.sort_by_key(|n| n.span);
        out
    }
}

impl Default for CitationExtractor {
    fn default() -> Self {
        Self::new(ReporterRegistry::default())
    }
}

/// Extracts citations with a one-off extractor. Prefer reusing a
/// [`CitationExtractor`] when scanning many documents.
pub fn extract_citations(text: &str, registry: &ReporterRegistry) -> Vec<Citation> {
    CitationExtractor::new(registry.clone()).extract(text)
}

fn char_index(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Incremental byte→char conversion for monotonically increasing offsets.
struct CharOffsets<'a> {
    text: &'a str,
    byte: usize,
    chars: usize,
}

impl<'a> CharOffsets<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            byte: 0,
            chars: 0,
        }
    }

    fn at(&mut self, byte: usize) -> usize {
        if byte < self.byte {
            return char_index(self.text, byte);
        }
        self.chars += self.text[self.byte..byte].chars().count();
        self.byte = byte;
        self.chars
    }
}

/// Case caption directly preceding a citation, as in
/// `"Lenz v. Universal Music Corp., 801 F.3d 1126"`.
fn case_name_before(prefix: &str) -> Option<String> {
    let para = blank_line_re()
        .split(prefix)
        .last()
        .unwrap_or_default()
        .trim_end();
    let body = para.strip_suffix(',')?;
    if let Some(v) = body.rfind(" v. ") {
        let right = body[v + 4..].trim();
        if right.is_empty() || right.contains([';', '(', ')', '\n']) {
            return None;
        }
        let left = caption_tail(&body[..v])?;
        return Some(format!("{left} v. {right}"));
    }
    let re = body.rfind("In re ")?;
    let name = body[re..].trim();
    (!name.contains([';', '(', ')', '\n'])).then(|| name.to_owned())
}

/// Longest run of caption-like words at the end of `s`.
fn caption_tail(s: &str) -> Option<String> {
    let tokens: Vec<&str> = s.split_whitespace().collect();
    let mut first = tokens.len();
    for (i, tok) in tokens.iter().enumerate().rev() {
        if !caption_word(tok) {
            break;
        }
        first = i;
    }
    let mut words = &tokens[first..];
    while let Some((head, rest)) = words.split_first() {
        if SIGNALS.contains(head) || CONNECTORS.contains(head) {
            words = rest;
        } else {
            break;
        }
    }
    (!words.is_empty()).then(|| words.join(" "))
}

fn caption_word(tok: &str) -> bool {
    if tok.ends_with([',', ';', ':']) {
        return false;
    }
    if CONNECTORS.contains(&tok) {
        return true;
    }
    let Some(first) = tok.chars().next() else {
        return false;
    };
    if !(first.is_uppercase() || first.is_ascii_digit() || first == '&') {
        return false;
    }
    // A capitalised word ending a sentence ("Court.") stops the caption;
    // short abbreviations ("Co.", "Inc.", "U.S.") do not.
    !tok.ends_with('.') || tok.chars().count() <= 5 || tok.matches('.').count() > 1
}
