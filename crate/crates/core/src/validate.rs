//! Control-grammar and per-slot checks for [`DuplexLog`].
//!
//! The model stream must be a prefix of `THINK* (SHIFT SPEAK* BREAK THINK*)*`;
//! a log may end inside a speaking turn.

use std::fmt;

use serde::Serialize;

use crate::log::{DuplexLog, ModelSlot};
use crate::token::{AUDIO_CODEBOOK_SIZE, AUDIO_TOKENS_PER_SPEAK_SLOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Chunk indices must start at 0 and increase by one.
    IndexSequence,
    SpeakBeforeShift,
    BreakWhileListening,
    ShiftWhileSpeaking,
    ThinkWhileSpeaking,
    AudioArity,
    AudioRange,
    TimeBase,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::IndexSequence => "index-sequence",
            Rule::SpeakBeforeShift => "speak-before-shift",
            Rule::BreakWhileListening => "break-while-listening",
            Rule::ShiftWhileSpeaking => "shift-while-speaking",
            Rule::ThinkWhileSpeaking => "think-while-speaking",
            Rule::AudioArity => "audio-arity",
            Rule::AudioRange => "audio-range",
            Rule::TimeBase => "time-base",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Position of the offending chunk in the log.
    pub chunk: u64,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chunk {}: [{}] {}", self.chunk, self.rule.name(), self.message)
    }
}

/// Returns every violation in `log`; an empty list means the log is well formed.
pub fn validate_log(log: &DuplexLog) -> Vec<Violation> {
    let mut out = Vec::new();
    for broken in log.time_base.check() {
        out.push(Violation {
            chunk: 0,
            rule: Rule::TimeBase,
            message: format!("time base breaks identity: {broken}"),
        });
    }

    let mut speaking = false;
    for (pos, chunk) in log.chunks.iter().enumerate() {
        let pos = pos as u64;
        let mut flag = |rule: Rule, message: String| {
            out.push(Violation {
                chunk: pos,
                rule,
                message,
            })
        };
        if chunk.index != pos {
            flag(
                Rule::IndexSequence,
                format!("expected index {pos}, found {}", chunk.index),
            );
        }
        match (&chunk.model, speaking) {
            (ModelSlot::Think, false) => {}
            (ModelSlot::Think, true) => {
                flag(Rule::ThinkWhileSpeaking, format!("THINK inside a speaking turn at chunk {pos}"))
            }
            (ModelSlot::Shift, false) => speaking = true,
            (ModelSlot::Shift, true) => {
                flag(Rule::ShiftWhileSpeaking, format!("SHIFT without a preceding BREAK at chunk {pos}"))
            }
            (ModelSlot::Break, true) => speaking = false,
            (ModelSlot::Break, false) => {
                flag(Rule::BreakWhileListening, format!("BREAK while listening at chunk {pos}"))
            }
            (ModelSlot::Speak { .. }, false) => {
                flag(Rule::SpeakBeforeShift, format!("SPEAK before SHIFT at chunk {pos}"))
            }
            (ModelSlot::Speak { .. }, true) => {}
        }
        if let ModelSlot::Speak { audio, .. } = &chunk.model {
            if audio.len() != AUDIO_TOKENS_PER_SPEAK_SLOT {
                flag(
                    Rule::AudioArity,
                    format!(
                        "audio arity {} != {AUDIO_TOKENS_PER_SPEAK_SLOT}",
                        audio.len()
                    ),
                );
            }
            for &id in audio.iter().filter(|&&id| id >= AUDIO_CODEBOOK_SIZE) {
                flag(
                    Rule::AudioRange,
                    format!("audio id {id} outside [0, {AUDIO_CODEBOOK_SIZE})"),
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::UserFrame;
    use crate::log::ChunkRecord;
    use crate::time::TimeBase;

    fn log_of(slots: Vec<ModelSlot>) -> DuplexLog {
        let mut log = DuplexLog::new("t", 0);
        log.chunks = slots
            .into_iter()
            .enumerate()
            .map(|(i, model)| ChunkRecord {
                index: i as u64,
                user: UserFrame::new(false),
                model,
            })
            .collect();
        log
    }

    fn rules(log: &DuplexLog) -> Vec<(u64, Rule)> {
        validate_log(log).into_iter().map(|v| (v.chunk, v.rule)).collect()
    }

    #[test]
    fn minimal_turn_is_valid() {
        let log = log_of(vec![
            ModelSlot::Think,
            ModelSlot::Shift,
            ModelSlot::speak(0, [0; 4]),
            ModelSlot::speak(0, [1; 4]),
            ModelSlot::Break,
        ]);
        assert!(validate_log(&log).is_empty());
    }

    #[test]
    fn speak_first_is_rejected() {
        let log = log_of(vec![ModelSlot::speak(0, [0; 4])]);
        let v = validate_log(&log);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::SpeakBeforeShift);
        assert_eq!(v[0].message, "SPEAK before SHIFT at chunk 0");
    }

    #[test]
    fn short_audio_is_rejected() {
        let log = log_of(vec![
            ModelSlot::Shift,
            ModelSlot::Speak {
                text: 0,
                audio: vec![1, 2, 3],
            },
        ]);
        assert_eq!(rules(&log), vec![(1, Rule::AudioArity)]);
    }

    #[test]
    fn session_may_end_mid_turn() {
        let log = log_of(vec![ModelSlot::Think, ModelSlot::Shift, ModelSlot::speak(0, [0; 4])]);
        assert!(validate_log(&log).is_empty());
    }

    #[test]
    fn break_then_shift_is_legal() {
        let log = log_of(vec![ModelSlot::Shift, ModelSlot::Break, ModelSlot::Shift, ModelSlot::Break]);
        assert!(validate_log(&log).is_empty());
    }

    #[test]
    fn grammar_errors_are_located() {
        let log = log_of(vec![
            ModelSlot::Break,
            ModelSlot::Shift,
            ModelSlot::Think,
            ModelSlot::Shift,
            ModelSlot::Speak {
                text: 0,
                audio: vec![0, 0, 0, 99_999],
            },
        ]);
        assert_eq!(
            rules(&log),
            vec![
                (0, Rule::BreakWhileListening),
                (2, Rule::ThinkWhileSpeaking),
                (3, Rule::ShiftWhileSpeaking),
                (4, Rule::AudioRange),
            ]
        );
    }

    #[test]
    fn index_gaps_and_time_base() {
        let mut log = log_of(vec![ModelSlot::Think, ModelSlot::Think]);
        log.chunks[1].index = 5;
        log.time_base = TimeBase {
            chunk_duration_s: 0.2,
            ..TimeBase::default()
        };
        let r = rules(&log);
        assert!(r.contains(&(1, Rule::IndexSequence)));
        assert!(r.iter().any(|(_, rule)| *rule == Rule::TimeBase));
    }
}
