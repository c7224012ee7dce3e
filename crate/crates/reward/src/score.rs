//! Composition of the four reward components.

use serde::{Deserialize, Serialize};

use crate::accuracy::{score_accuracy, OptionMap};
use crate::judge::{Judge, JudgeRequest, JudgeVerdict};
use crate::parse::{score_format, ModelOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Flag {
    /// No parsable answer section.
    MissingAnswer,
    /// The judge failed; consistency and thinking were scored 0.
    JudgeUnavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub accuracy: u8,
    pub format: u8,
    pub consistency: u8,
    pub thinking_steps: u8,
    pub thinking: f64,
    pub total: f64,
    pub flags: Vec<Flag>,
}

impl RewardBreakdown {
    fn new(accuracy: u8, format: u8, verdict: JudgeVerdict, flags: Vec<Flag>) -> Self {
        let steps = verdict.thinking_steps as u32;
        let whole = accuracy as u32 + format as u32 + verdict.consistency as u32;
        Self {
            accuracy,
            format,
            consistency: verdict.consistency as u8,
            thinking_steps: verdict.thinking_steps,
            thinking: steps as f64 / 5.0,
            total: (whole * 5 + steps) as f64 / 5.0,
            flags,
        }
    }
}

const ZERO: JudgeVerdict = JudgeVerdict {
    consistency: false,
    thinking_steps: 0,
};

/// Consistency and thinking for one output. The judge is not consulted when
/// there is no parsed structure.
pub fn score_with_judge(
    output: &ModelOutput,
    gold: &str,
    judge: &dyn Judge,
) -> (JudgeVerdict, Option<Flag>) {
    let Some(p) = &output.parsed else {
        return (ZERO, None);
    };
    let request = JudgeRequest {
        think: p.think.clone(),
        answer: p.answer.clone(),
        gold: gold.to_string(),
    };
    match judge.judge(&request) {
        Ok(v) if v.thinking_steps <= 5 => (v, None),
        _ => (ZERO, Some(Flag::JudgeUnavailable)),
    }
}

pub fn score_total(
    output: &ModelOutput,
    gold: &str,
    options: Option<&OptionMap>,
    judge: &dyn Judge,
) -> RewardBreakdown {
    let mut flags = Vec::new();
    if output.parsed.is_none() {
        flags.push(Flag::MissingAnswer);
    }
    let accuracy = score_accuracy(output, gold, options);
    let format = score_format(output);
    let (verdict, flag) = score_with_judge(output, gold, judge);
    flags.extend(flag);
    RewardBreakdown::new(accuracy, format, verdict, flags)
}
