//! Full-duplex controller.
//!
//! The engine consumes one [`UserFrame`] per chunk, asks a
//! [`ResponsePolicy`] for an abstract [`PolicyDecision`], and emits exactly
//! one [`ModelSlot`]. Control tokens are produced here and never by the
//! policy, so a policy can be wrong about *when* to speak but cannot produce
//! an ill-formed stream.
//!
//! | mode      | decision    | slot  | next mode |
//! |-----------|-------------|-------|-----------|
//! | LISTENING | HOLD        | THINK | LISTENING |
//! | LISTENING | TAKE_TURN   | SHIFT | SPEAKING  |
//! | SPEAKING  | CONTINUE    | SPEAK | SPEAKING  |
//! | SPEAKING  | YIELD       | BREAK | LISTENING |
//!
//! Any other pairing is an [`EngineError::IllegalDecision`].

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::UserFrame;
use crate::log::{ChunkRecord, DuplexLog, ModelSlot};
use crate::token::{AUDIO_CODEBOOK_SIZE, AUDIO_TOKENS_PER_SPEAK_SLOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Listening,
    Speaking,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Listening => "LISTENING",
            Mode::Speaking => "SPEAKING",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineState {
    pub mode: Mode,
    pub chunk_index: u64,
    /// Completed model turns (BREAKs emitted so far).
    pub turn_count: u64,
}

impl Default for EngineState {
    fn default() -> Self {
        Self {
            mode: Mode::Listening,
            chunk_index: 0,
            turn_count: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyDecision {
    Hold,
    TakeTurn,
    Continue {
        text: u32,
        audio: [u32; AUDIO_TOKENS_PER_SPEAK_SLOT],
    },
    Yield,
}

impl PolicyDecision {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyDecision::Hold => "HOLD",
            PolicyDecision::TakeTurn => "TAKE_TURN",
            PolicyDecision::Continue { .. } => "CONTINUE",
            PolicyDecision::Yield => "YIELD",
        }
    }
}

impl fmt::Display for PolicyDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a policy sees before deciding slot `state.chunk_index`.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub state: EngineState,
    pub frame: &'a UserFrame,
    /// Most recent chunks, oldest first, at most the configured window.
    pub history: &'a [ChunkRecord],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("policy did not answer chunk {chunk} within {timeout_ms} ms")]
    Timeout { chunk: u64, timeout_ms: u64 },
    #[error("policy transport failed: {0}")]
    Transport(String),
    #[error("policy protocol violation: {0}")]
    Protocol(String),
}

pub trait ResponsePolicy {
    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError>;
}

impl<P: ResponsePolicy + ?Sized> ResponsePolicy for Box<P> {
    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
        (**self).decide(obs)
    }
}

impl<P: ResponsePolicy + ?Sized> ResponsePolicy for &mut P {
    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
        (**self).decide(obs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("illegal decision {decision} while {mode} at chunk {chunk}", mode = .mode.as_str())]
    IllegalDecision {
        chunk: u64,
        mode: Mode,
        decision: &'static str,
    },
    #[error("policy emitted audio id {id} (codebook is {AUDIO_CODEBOOK_SIZE}) at chunk {chunk}")]
    AudioOutOfRange { chunk: u64, id: u32 },
    #[error("policy failed at chunk {chunk}: {source}")]
    Policy {
        chunk: u64,
        #[source]
        source: PolicyError,
    },
}

/// A failed session together with everything emitted before the failure.
#[derive(Debug, Clone, Error)]
#[error("session {} aborted after {} chunks: {error}", partial.session_id, partial.chunks.len())]
pub struct SessionError {
    pub error: EngineError,
    pub partial: DuplexLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// History window handed to the policy, in chunks.
    pub history_window: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { history_window: 32 }
    }
}

/// Applies one decision. Pure: the caller owns the state and the history.
pub fn step<P: ResponsePolicy + ?Sized>(
    state: EngineState,
    frame: &UserFrame,
    history: &[ChunkRecord],
    policy: &mut P,
) -> Result<(ModelSlot, EngineState), EngineError> {
    let chunk = state.chunk_index;
    let obs = Observation {
        state,
        frame,
        history,
    };
    let decision = policy
        .decide(&obs)
        .map_err(|source| EngineError::Policy { chunk, source })?;

    let mut next = EngineState {
        chunk_index: chunk + 1,
        ..state
    };
    let slot = match (state.mode, decision) {
        (Mode::Listening, PolicyDecision::Hold) => ModelSlot::Think,
        (Mode::Listening, PolicyDecision::TakeTurn) => {
            next.mode = Mode::Speaking;
            ModelSlot::Shift
        }
        (Mode::Speaking, PolicyDecision::Continue { text, audio }) => {
            if let Some(&id) = audio.iter().find(|&&id| id >= AUDIO_CODEBOOK_SIZE) {
                return Err(EngineError::AudioOutOfRange { chunk, id });
            }
            ModelSlot::speak(text, audio)
        }
        (Mode::Speaking, PolicyDecision::Yield) => {
            next.mode = Mode::Listening;
            next.turn_count += 1;
            ModelSlot::Break
        }
        (mode, decision) => {
            return Err(EngineError::IllegalDecision {
                chunk,
                mode,
                decision: decision.name(),
            })
        }
    };
    Ok((slot, next))
}

/// Single-session engine holding the state and the policy's history window.
#[derive(Debug)]
pub struct Engine {
    state: EngineState,
    config: EngineConfig,
    history: VecDeque<ChunkRecord>,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Self {
            state: EngineState::default(),
            config,
            history: VecDeque::with_capacity(config.history_window + 1),
        }
    }

    pub fn state(&self) -> EngineState {
        self.state
    }

    /// Consumes one frame and returns the chunk it produced.
    pub fn push<P: ResponsePolicy + ?Sized>(
        &mut self,
        frame: UserFrame,
        policy: &mut P,
    ) -> Result<ChunkRecord, EngineError> {
        let (slot, next) = step(
            self.state,
            &frame,
            self.history.make_contiguous(),
            policy,
        )?;
        let record = ChunkRecord {
            index: self.state.chunk_index,
            user: frame,
            model: slot,
        };
        self.state = next;
        if self.config.history_window > 0 {
            if self.history.len() == self.config.history_window {
                self.history.pop_front();
            }
            self.history.push_back(record.clone());
        }
        Ok(record)
    }
}

/// Drives `policy` over a whole frame stream.
pub fn run_session<I, P>(
    session_id: &str,
    seed: u64,
    frames: I,
    policy: &mut P,
    config: EngineConfig,
) -> Result<DuplexLog, SessionError>
where
    I: IntoIterator<Item = UserFrame>,
    P: ResponsePolicy + ?Sized,
{
    let mut log = DuplexLog::new(session_id, seed);
    let mut engine = Engine::new(config);
    for frame in frames {
        match engine.push(frame, policy) {
            Ok(record) => log.chunks.push(record),
            Err(error) => return Err(SessionError { error, partial: log }),
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate_log;

    struct Fixed(PolicyDecision);

    impl ResponsePolicy for Fixed {
        fn decide(&mut self, _: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
            Ok(self.0)
        }
    }

    /// Replays a script, then holds/continues forever.
    struct Script(Vec<PolicyDecision>, usize);

    impl ResponsePolicy for Script {
        fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
            let d = self.0.get(self.1).copied().unwrap_or(match obs.state.mode {
                Mode::Listening => PolicyDecision::Hold,
                Mode::Speaking => PolicyDecision::Continue {
                    text: 0,
                    audio: [0; 4],
                },
            });
            self.1 += 1;
            Ok(d)
        }
    }

    const SPEAK: PolicyDecision = PolicyDecision::Continue {
        text: 0,
        audio: [1, 2, 3, 4],
    };

    fn listening() -> EngineState {
        EngineState::default()
    }

    fn speaking() -> EngineState {
        EngineState {
            mode: Mode::Speaking,
            chunk_index: 10,
            turn_count: 2,
        }
    }

    #[test]
    fn hold_while_listening_thinks() {
        let (slot, next) = step(listening(), &UserFrame::new(true), &[], &mut Fixed(PolicyDecision::Hold)).unwrap();
        assert_eq!(slot, ModelSlot::Think);
        assert_eq!(next.mode, Mode::Listening);
        assert_eq!(next.chunk_index, 1);
    }

    #[test]
    fn take_turn_shifts() {
        let (slot, next) = step(listening(), &UserFrame::new(true), &[], &mut Fixed(PolicyDecision::TakeTurn)).unwrap();
        assert_eq!(slot, ModelSlot::Shift);
        assert_eq!(next.mode, Mode::Speaking);
    }

    #[test]
    fn continue_speaks_and_yield_breaks() {
        let (slot, next) = step(speaking(), &UserFrame::new(false), &[], &mut Fixed(SPEAK)).unwrap();
        assert_eq!(slot, ModelSlot::speak(0, [1, 2, 3, 4]));
        assert_eq!(next, EngineState { chunk_index: 11, ..speaking() });

        let (slot, next) = step(speaking(), &UserFrame::new(true), &[], &mut Fixed(PolicyDecision::Yield)).unwrap();
        assert_eq!(slot, ModelSlot::Break);
        assert_eq!(next.mode, Mode::Listening);
        assert_eq!(next.turn_count, 3);
    }

    #[test]
    fn mode_mismatch_is_illegal() {
        let err = step(listening(), &UserFrame::new(true), &[], &mut Fixed(SPEAK)).unwrap_err();
        assert_eq!(
            err,
            EngineError::IllegalDecision {
                chunk: 0,
                mode: Mode::Listening,
                decision: "CONTINUE"
            }
        );
        assert!(err.to_string().contains("chunk 0"));
        for d in [PolicyDecision::Hold, PolicyDecision::TakeTurn] {
            assert!(step(speaking(), &UserFrame::new(true), &[], &mut Fixed(d)).is_err());
        }
        assert!(step(listening(), &UserFrame::new(true), &[], &mut Fixed(PolicyDecision::Yield)).is_err());
    }

    #[test]
    fn out_of_range_audio_is_rejected() {
        let bad = PolicyDecision::Continue {
            text: 0,
            audio: [0, 0, 16_384, 0],
        };
        assert_eq!(
            step(speaking(), &UserFrame::new(true), &[], &mut Fixed(bad)).unwrap_err(),
            EngineError::AudioOutOfRange { chunk: 10, id: 16_384 }
        );
    }

    #[test]
    fn empty_stream_gives_empty_log() {
        let log = run_session("e", 0, Vec::new(), &mut Fixed(PolicyDecision::Hold), EngineConfig::default()).unwrap();
        assert!(log.chunks.is_empty());
    }

    #[test]
    fn silent_stream_with_hold_is_all_think() {
        let frames = vec![UserFrame::new(false); 20];
        let log = run_session("s", 0, frames, &mut Fixed(PolicyDecision::Hold), EngineConfig::default()).unwrap();
        assert_eq!(log.chunks.len(), 20);
        assert!(log.slots().all(|s| *s == ModelSlot::Think));
        assert!(validate_log(&log).is_empty());
    }

    #[test]
    fn failure_keeps_partial_log() {
        use PolicyDecision::*;
        let mut policy = Script(vec![Hold, TakeTurn, SPEAK, TakeTurn], 0);
        let err = run_session("p", 3, vec![UserFrame::new(true); 6], &mut policy, EngineConfig::default()).unwrap_err();
        assert_eq!(err.partial.chunks.len(), 3);
        assert!(matches!(err.error, EngineError::IllegalDecision { chunk: 3, .. }));
        assert!(validate_log(&err.partial).is_empty());
    }

    #[test]
    fn history_window_is_bounded() {
        struct Probe(usize);
        impl ResponsePolicy for Probe {
            fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
                self.0 = self.0.max(obs.history.len());
                assert_eq!(obs.history.len() as u64, obs.state.chunk_index.min(4));
                if let Some(last) = obs.history.last() {
                    assert_eq!(last.index + 1, obs.state.chunk_index);
                }
                Ok(PolicyDecision::Hold)
            }
        }
        let mut probe = Probe(0);
        run_session("h", 0, vec![UserFrame::new(false); 10], &mut probe, EngineConfig { history_window: 4 }).unwrap();
        assert_eq!(probe.0, 4);
    }
}
