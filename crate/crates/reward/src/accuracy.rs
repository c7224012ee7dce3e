//! Answer matching against a gold key.

use std::collections::BTreeMap;

use crate::parse::ModelOutput;

/// Option letter to option text, e.g. `"B" -> "a violin"`.
pub type OptionMap = BTreeMap<String, String>;

const EXTRA_TRAILING: &[char] = &['。', '，', '！', '？', '；', '：', '、'];

/// Trim, lowercase, drop trailing punctuation.
pub fn normalize(s: &str) -> String {
    s.trim()
        .to_lowercase()
        .trim_end_matches(|c: char| c.is_ascii_punctuation() || EXTRA_TRAILING.contains(&c))
        .trim_end()
        .to_string()
}

/// Collapses a letter or an option text to the normalized letter.
fn canonical(s: &str, options: Option<&OptionMap>) -> String {
    let n = normalize(s);
    if let Some(opts) = options {
        for (letter, text) in opts {
            let l = normalize(letter);
            if n == l || n == normalize(text) {
                return l;
            }
        }
    }
    n
}

/// 1 iff the parsed answer matches `gold`; 0 when there is no parsed answer.
pub fn score_accuracy(output: &ModelOutput, gold: &str, options: Option<&OptionMap>) -> u8 {
    match &output.parsed {
        Some(p) => (canonical(&p.answer, options) == canonical(gold, options)) as u8,
        None => 0,
    }
}
