//! Structure check. Equivalent to searching for the first match of
//! `(?s)<think>(.*?)</think>.*?<answer>(.*?)</answer>`.

use serde::{Deserialize, Serialize};

const THINK_OPEN: &str = "<think>";
const THINK_CLOSE: &str = "</think>";
const ANSWER_OPEN: &str = "<answer>";
const ANSWER_CLOSE: &str = "</answer>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parsed {
    pub think: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOutput {
    pub raw_text: String,
    pub parsed: Option<Parsed>,
}

fn find_from(hay: &str, needle: &str, from: usize) -> Option<(usize, usize)> {
    hay[from..].find(needle).map(|i| (from + i, from + i + needle.len()))
}

/// Each section takes the earliest closing tag after its opening tag. When
/// the earliest candidates fail to complete, no later candidate can either,
/// so a single forward scan decides the match.
pub fn parse_output(raw_text: &str) -> ModelOutput {
    let parsed = (|| {
        let (_, think_start) = find_from(raw_text, THINK_OPEN, 0)?;
        let (think_end, after_think) = find_from(raw_text, THINK_CLOSE, think_start)?;
        let (_, answer_start) = find_from(raw_text, ANSWER_OPEN, after_think)?;
        let (answer_end, _) = find_from(raw_text, ANSWER_CLOSE, answer_start)?;
        Some(Parsed {
            think: raw_text[think_start..think_end].to_string(),
            answer: raw_text[answer_start..answer_end].to_string(),
        })
    })();
    ModelOutput {
        raw_text: raw_text.to_string(),
        parsed,
    }
}

pub fn score_format(output: &ModelOutput) -> u8 {
    output.parsed.is_some() as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(s: &str) -> Option<(String, String)> {
        parse_output(s).parsed.map(|p| (p.think, p.answer))
    }

    #[test]
    fn examples() {
        assert_eq!(parts("<think>A beats B</think><answer>B</answer>"), Some(("A beats B".into(), "B".into())));
        assert_eq!(parts("answer: B"), None);
        assert_eq!(parts("<think>x</think> noise <answer>y</answer>"), Some(("x".into(), "y".into())));
        assert_eq!(score_format(&parse_output("<answer>a</answer><think>t</think>")), 0);
        assert_eq!(score_format(&parse_output("<think>t</think>\n<answer>a</answer>")), 1);
    }

    #[test]
    fn first_sections_win() {
        assert_eq!(
            parts("pre <think>a</think><think>b</think><answer>1</answer><answer>2</answer>"),
            Some(("a".into(), "1".into()))
        );
        assert_eq!(parts("<think>multi\nline</think><answer>\nB\n</answer>"), Some(("multi\nline".into(), "\nB\n".into())));
        assert_eq!(parts("<think></think><answer></answer>"), Some((String::new(), String::new())));
        assert_eq!(parts("<think>x</think><answer>y"), None);
        assert_eq!(parts("<think>x<answer>y</answer>"), None);
    }
}
