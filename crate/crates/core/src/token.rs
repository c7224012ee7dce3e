use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Size of the speech tokenizer codebook; audio token ids are below this.
pub const AUDIO_CODEBOOK_SIZE: u32 = 16_384;

/// Audio tokens carried by every speaking slot (25 Hz tokens in a 0.16 s chunk).
pub const AUDIO_TOKENS_PER_SPEAK_SLOT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Control {
    Think,
    Shift,
    Break,
}

impl Control {
    pub fn as_str(self) -> &'static str {
        match self {
            Control::Think => "THINK",
            Control::Shift => "SHIFT",
            Control::Break => "BREAK",
        }
    }
}

impl fmt::Display for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Text(u32),
    Audio(u32),
    Control(Control),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("audio token id {0} outside codebook [0, {AUDIO_CODEBOOK_SIZE})")]
    AudioOutOfRange(u32),
}

impl Token {
    pub fn audio(id: u32) -> Result<Self, TokenError> {
        if id < AUDIO_CODEBOOK_SIZE {
            Ok(Token::Audio(id))
        } else {
            Err(TokenError::AudioOutOfRange(id))
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Token::Audio(id) => *id < AUDIO_CODEBOOK_SIZE,
            Token::Text(_) | Token::Control(_) => true,
        }
    }
}
