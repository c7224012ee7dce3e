//! Chunk time base.

use serde::{Deserialize, Serialize};

/// Encoder frames folded into one user frame by the adapter (three stride-2 stages).
pub const ENCODER_FRAMES_PER_USER_FRAME: u64 = 8;

/// Rates shared by every stream in a session.
///
/// The values are fixed; the struct exists so logs carry them explicitly and
/// readers can reject logs produced under a different clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBase {
    pub chunk_duration_s: f64,
    pub user_frame_rate_hz: f64,
    pub audio_token_rate_hz: f64,
    pub encoder_frame_rate_hz: f64,
}

impl Default for TimeBase {
    fn default() -> Self {
        Self {
            chunk_duration_s: 0.16,
            user_frame_rate_hz: 6.25,
            audio_token_rate_hz: 25.0,
            encoder_frame_rate_hz: 50.0,
        }
    }
}

impl TimeBase {
    /// Returns the names of the rate identities this time base breaks.
    pub fn check(&self) -> Vec<&'static str> {
        let mut broken = Vec::new();
        if self.user_frame_rate_hz * self.chunk_duration_s != 1.0 {
            broken.push("one user frame per chunk");
        }
        if self.audio_token_rate_hz * self.chunk_duration_s != 4.0 {
            broken.push("four audio tokens per chunk");
        }
        if self.encoder_frame_rate_hz / self.user_frame_rate_hz
            != ENCODER_FRAMES_PER_USER_FRAME as f64
        {
            broken.push("eight encoder frames per user frame");
        }
        broken
    }

    /// Start time of chunk `index` in seconds.
    pub fn chunk_start_s(&self, index: u64) -> f64 {
        index as f64 * self.chunk_duration_s
    }
}

/// Number of 6.25 Hz user frames produced from `n_50hz` encoder frames.
///
/// A trailing group shorter than eight frames is right-padded with zero
/// frames, so this is `ceil(n / 8)`.
pub fn frames_from_encoder(n_50hz: u64) -> u64 {
    n_50hz.div_ceil(ENCODER_FRAMES_PER_USER_FRAME)
}
