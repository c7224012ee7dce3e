//! Silence-threshold policy, the early-response baseline.

use duplexkit_core::{Mode, Observation, PolicyDecision, PolicyError, ResponsePolicy};

use crate::policy::placeholder_audio;

pub const DEFAULT_RESPONSE_CHUNKS: u64 = 3;

/// Takes the turn after `silence_chunks` consecutive unvoiced frames that
/// follow user speech, speaks for `response_chunks` slots, then yields. It
/// ignores overlap entirely, so barge-ins are never honoured.
#[derive(Debug, Clone)]
pub struct ThresholdPolicy {
    silence_chunks: u64,
    response_chunks: u64,
    silent_run: u64,
    heard: bool,
    spoken: u64,
}

impl ThresholdPolicy {
    /// # Panics
    /// If `silence_chunks` is zero.
    pub fn new(silence_chunks: u64) -> Self {
        Self::with_response(silence_chunks, DEFAULT_RESPONSE_CHUNKS)
    }

    pub fn with_response(silence_chunks: u64, response_chunks: u64) -> Self {
        assert!(silence_chunks >= 1, "threshold must be at least one chunk");
        Self {
            silence_chunks,
            response_chunks,
            silent_run: 0,
            heard: false,
            spoken: 0,
        }
    }

    pub fn silence_chunks(&self) -> u64 {
        self.silence_chunks
    }

    pub fn response_chunks(&self) -> u64 {
        self.response_chunks
    }
}

impl ResponsePolicy for ThresholdPolicy {
    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
        match obs.state.mode {
            Mode::Listening => {
                if obs.frame.vad {
                    self.silent_run = 0;
                    self.heard = true;
                    return Ok(PolicyDecision::Hold);
                }
                self.silent_run += 1;
                if self.heard && self.silent_run >= self.silence_chunks {
                    self.heard = false;
                    self.silent_run = 0;
                    self.spoken = 0;
                    return Ok(PolicyDecision::TakeTurn);
                }
                Ok(PolicyDecision::Hold)
            }
            Mode::Speaking => {
                self.silent_run = 0;
                if self.spoken >= self.response_chunks {
                    return Ok(PolicyDecision::Yield);
                }
                self.spoken += 1;
                Ok(PolicyDecision::Continue {
                    text: 0,
                    audio: placeholder_audio(obs.state.chunk_index),
                })
            }
        }
    }
}
