use std::collections::HashMap;
use std::io::BufRead;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::CitationError;

/// One reporter abbreviation and its accepted spellings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReporterEntry {
    pub canonical: String,
    #[serde(default)]
    pub variants: Vec<String>,
}

const DEFAULT_REPORTERS: &[(&str, &[&str])] = &[
    ("U.S.", &["U. S."]),
    ("S. Ct.", &["S.Ct."]),
    ("L. Ed.", &["L.Ed."]),
    ("L. Ed. 2d", &["L.Ed.2d"]),
    ("F.", &[]),
    ("F.2d", &["F. 2d"]),
    ("F.3d", &["F. 3d"]),
    ("F.4th", &["F. 4th"]),
    ("F. Supp.", &["F.Supp."]),
    ("F. Supp. 2d", &["F.Supp.2d"]),
    ("F. Supp. 3d", &["F.Supp.3d"]),
    ("F. App'x", &["Fed. Appx.", "Fed. App'x", "F. Appx."]),
    ("F.R.D.", &[]),
    ("B.R.", &[]),
    ("U.S.P.Q.", &[]),
    ("U.S.P.Q.2d", &["USPQ2d"]),
    ("A.2d", &["A. 2d"]),
    ("A.3d", &["A. 3d"]),
    ("N.E.2d", &["N.E. 2d"]),
    ("N.Y.S.2d", &["N.Y.S. 2d"]),
    ("P.3d", &["P. 3d"]),
    ("So. 2d", &["So.2d"]),
    ("Cal. Rptr.", &["Cal.Rptr."]),
];

/// Reporter abbreviations recognised by the extractor.
///
/// Lookup ignores whitespace, so `"F. 3d"` and `"F.3d"` resolve to the same
/// canonical form even without an explicit variant.
#[derive(Debug, Clone)]
pub struct ReporterRegistry {
    entries: Vec<ReporterEntry>,
    lookup: HashMap<String, usize>,
    pattern: String,
}

fn normalize(form: &str) -> String {
    form.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Regex fragment matching `form` with optional spacing after periods and
/// wherever the form itself has a space.
fn form_pattern(form: &str) -> String {
    let mut out = String::new();
    let mut chars = form.trim().chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        out.push_str(&regex::escape(&c.to_string()));
        let next_is_space = chars.peek().is_some_and(|n| n.is_whitespace());
        if (c == '.' || next_is_space) && chars.clone().any(|n| !n.is_whitespace()) {
            out.push_str("[ \\t]*");
        }
    }
    out
}

impl ReporterRegistry {
    pub fn new(entries: Vec<ReporterEntry>) -> Result<Self, CitationError> {
        if entries.is_empty() {
            return Err(CitationError::EmptyRegistry);
        }
        let mut lookup = HashMap::new();
        let mut patterns = Vec::new();
        for (i, entry) in entries.iter().enumerate() {
            for form in std::iter::once(&entry.canonical).chain(&entry.variants) {
                let key = normalize(form);
                if key.is_empty() {
                    return Err(CitationError::InvalidReporter(form.clone()));
                }
                if let Some(&prev) = lookup.get(&key) {
                    if prev != i {
                        return Err(CitationError::ConflictingVariant(form.clone()));
                    }
                    continue;
                }
                lookup.insert(key, i);
                patterns.push(form_pattern(form));
            }
        }
        // Longest alternatives first so "F. Supp. 2d" wins over "F.".
        patterns.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        patterns.dedup();
        let pattern = patterns.join("|");
        Regex::new(&pattern).map_err(|e| CitationError::InvalidReporter(e.to_string()))?;
        Ok(Self {
            entries,
            lookup,
            pattern,
        })
    }

    /// Reads one `{"canonical": ..., "variants": [...]}` object per line.
    pub fn from_jsonl(reader: impl BufRead) -> Result<Self, CitationError> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ReporterEntry =
                serde_json::from_str(&line).map_err(|e| CitationError::Malformed {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            entries.push(entry);
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[ReporterEntry] {
        &self.entries
    }

    /// Canonical spelling of `form`, if registered.
    pub fn canonical(&self, form: &str) -> Option<&str> {
        self.lookup
            .get(&normalize(form))
            .map(|&i| self.entries[i].canonical.as_str())
    }

    pub(crate) fn alternation(&self) -> &str {
        &self.pattern
    }
}

impl Default for ReporterRegistry {
    fn default() -> Self {
        let entries = DEFAULT_REPORTERS
            .iter()
            .map(|(canonical, variants)| ReporterEntry {
                canonical: (*canonical).to_owned(),
                variants: variants.iter().map(|v| (*v).to_owned()).collect(),
            })
            .collect();
        Self::new(entries).expect("built-in reporter table is valid")
    }
}
