//! Shared building blocks for the duplexkit toolkit.
//!
//! A session is a sequence of 0.16 s chunks. Each chunk pairs one user frame
//! with one model slot; the model slot is either a single control token
//! (`THINK`, `SHIFT`, `BREAK`) or a speaking slot of one text token followed by
//! four audio tokens. [`engine`] drives a response policy over a user stream
//! and produces a [`DuplexLog`]; [`validate_log`] checks any log against the
//! control grammar.

// A failed session hands back its partial log by value.
#![allow(clippy::result_large_err)]

pub mod engine;
pub mod frame;
pub mod line;
pub mod log;
pub mod seed;
pub mod time;
pub mod token;
pub mod validate;

pub use engine::{
    run_session, step, Engine, EngineConfig, EngineError, EngineState, Mode, Observation,
    PolicyDecision, PolicyError, ResponsePolicy, SessionError,
};
pub use frame::{Annotation, UserFrame};
pub use line::{looks_like_address, LineChannel, LineError};
pub use log::{ChunkRecord, DuplexLog, FeatureMode, LogFormatError, ModelSlot, LOG_FORMAT};
pub use time::{frames_from_encoder, TimeBase};
pub use token::{Control, Token, TokenError, AUDIO_CODEBOOK_SIZE, AUDIO_TOKENS_PER_SPEAK_SLOT};
pub use validate::{validate_log, Rule, Violation};
