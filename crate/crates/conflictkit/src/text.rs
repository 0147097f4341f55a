//! Answer normalization and containment checks used by QA categorization.
//!
//! Matching is done on normalized token sequences: case-folded, split on
//! every non-alphanumeric character, empty fragments dropped. "Dili!" and
//! "dili" normalize identically, and containment is a contiguous token-window
//! match so "Port Louis" is not found in "Port Elizabeth Louis Trichardt".

/// Splits `s` into lowercased alphanumeric tokens.
pub fn normalized_tokens(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Canonical single-string form of [`normalized_tokens`].
pub fn normalize(s: &str) -> String {
    normalized_tokens(s).join(" ")
}

/// True when the normalized tokens of `needle` appear as a contiguous
/// subsequence of the normalized tokens of `haystack`. An empty or
/// punctuation-only needle never matches.
pub fn contains_tokens(haystack: &str, needle: &str) -> bool {
    let h = normalized_tokens(haystack);
    let n = normalized_tokens(needle);
    if n.is_empty() || n.len() > h.len() {
        return false;
    }
    h.windows(n.len()).any(|w| w == n.as_slice())
}

/// First line of `s` that contains non-whitespace, trimmed.
pub fn first_nonempty_line(s: &str) -> Option<&str> {
    s.lines().map(str::trim).find(|l| !l.is_empty())
}
