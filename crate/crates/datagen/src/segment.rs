//! Transcript segmentation at phrase or sentence scale.

use crate::error::DatagenError;
use crate::sample::Scale;

const SENTENCE_END: &[char] = &['.', '!', '?'];
const PHRASE_END: &[char] = &[',', ';', ':', '.', '!', '?'];

/// Splits `text` into byte ranges that tile it exactly. A cut falls after a
/// terminator followed by whitespace, and the whitespace stays with the span
/// on its left.
pub fn segment_transcript(text: &str, scale: Scale) -> Result<Vec<(usize, usize)>, DatagenError> {
    if text.is_empty() {
        return Err(DatagenError::EmptyText);
    }
    let enders = match scale {
        Scale::Sentence => SENTENCE_END,
        Scale::Phrase => PHRASE_END,
    };
    let mut spans = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        if !enders.contains(&c) {
            continue;
        }
        if !matches!(chars.peek(), Some((_, n)) if n.is_whitespace()) {
            continue;
        }
        while let Some(&(_, n)) = chars.peek() {
            if !n.is_whitespace() {
                break;
            }
            chars.next();
        }
        let end = chars.peek().map_or(text.len(), |&(i, _)| i);
        spans.push((start, end));
        start = end;
    }
    if start < text.len() {
        spans.push((start, text.len()));
    }
    Ok(spans)
}
