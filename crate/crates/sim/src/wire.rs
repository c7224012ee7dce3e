//! Line-delimited JSON protocol for policies living outside the process.
//!
//! Per chunk the engine writes `{"obs":{"mode":"LISTENING","vad":true,"idx":12}}`
//! and reads back one of
//!
//! ```text
//! {"d":"HOLD"}  {"d":"TAKE"}  {"d":"CONT","t":0,"a":[1,2,3,4]}  {"d":"YIELD"}
//! ```

use std::io::{self, BufRead, Write};
use std::time::Duration;

use duplexkit_core::{
    looks_like_address, EngineState, LineChannel, LineError, Mode, Observation, PolicyDecision,
    PolicyError, ResponsePolicy, UserFrame, AUDIO_TOKENS_PER_SPEAK_SLOT,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireObs {
    pub mode: Mode,
    pub vad: bool,
    pub idx: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObsMsg {
    pub obs: WireObs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionMsg {
    pub d: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<[u32; AUDIO_TOKENS_PER_SPEAK_SLOT]>,
}

impl From<PolicyDecision> for DecisionMsg {
    fn from(d: PolicyDecision) -> Self {
        let tag = |s: &str| DecisionMsg {
            d: s.into(),
            t: None,
            a: None,
        };
        match d {
            PolicyDecision::Hold => tag("HOLD"),
            PolicyDecision::TakeTurn => tag("TAKE"),
            PolicyDecision::Yield => tag("YIELD"),
            PolicyDecision::Continue { text, audio } => DecisionMsg {
                d: "CONT".into(),
                t: Some(text),
                a: Some(audio),
            },
        }
    }
}

impl TryFrom<DecisionMsg> for PolicyDecision {
    type Error = PolicyError;

    fn try_from(m: DecisionMsg) -> Result<Self, Self::Error> {
        Ok(match m.d.as_str() {
            "HOLD" => PolicyDecision::Hold,
            "TAKE" => PolicyDecision::TakeTurn,
            "YIELD" => PolicyDecision::Yield,
            "CONT" => PolicyDecision::Continue {
                text: m.t.unwrap_or(0),
                audio: m
                    .a
                    .ok_or_else(|| PolicyError::Protocol("CONT without audio ids".into()))?,
            },
            other => return Err(PolicyError::Protocol(format!("unknown decision {other:?}"))),
        })
    }
}

/// A policy reached over stdio of a child process or over TCP.
pub struct ExternalPolicy {
    channel: LineChannel,
}

impl ExternalPolicy {
    /// Connects to `target`, substituting `sid` for `{sid}` in commands.
    pub fn open(target: &str, sid: &str, timeout: Duration) -> Result<Self, PolicyError> {
        let target = if looks_like_address(target) {
            target.to_string()
        } else {
            target.replace("{sid}", sid)
        };
        let channel = LineChannel::open(&target, timeout).map_err(|e| PolicyError::Transport(e.to_string()))?;
        Ok(Self { channel })
    }
}

impl ResponsePolicy for ExternalPolicy {
    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
        let chunk = obs.state.chunk_index;
        let msg = ObsMsg {
            obs: WireObs {
                mode: obs.state.mode,
                vad: obs.frame.vad,
                idx: chunk,
            },
        };
        let request = serde_json::to_string(&msg).map_err(|e| PolicyError::Transport(e.to_string()))?;
        let line = self.channel.request(&request).map_err(|e| match e {
            LineError::Timeout(t) => PolicyError::Timeout {
                chunk,
                timeout_ms: t.as_millis() as u64,
            },
            other => PolicyError::Transport(other.to_string()),
        })?;
        let reply: DecisionMsg = serde_json::from_str(line.trim())
            .map_err(|e| PolicyError::Protocol(format!("chunk {chunk}: {e}: {:?}", line.trim())))?;
        reply.try_into()
    }
}

/// Answers observations from `input` with `policy` until end of input.
/// Returns the number of chunks served.
pub fn serve_policy<P, R, W>(policy: &mut P, input: R, mut output: W) -> io::Result<u64>
where
    P: ResponsePolicy + ?Sized,
    R: BufRead,
    W: Write,
{
    let mut turn_count = 0;
    let mut last_mode = Mode::Listening;
    let mut served = 0;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let msg: ObsMsg = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        if last_mode == Mode::Speaking && msg.obs.mode == Mode::Listening {
            turn_count += 1;
        }
        last_mode = msg.obs.mode;
        let frame = UserFrame::new(msg.obs.vad);
        let obs = Observation {
            state: EngineState {
                mode: msg.obs.mode,
                chunk_index: msg.obs.idx,
                turn_count,
            },
            frame: &frame,
            history: &[],
        };
        let decision = policy.decide(&obs).map_err(io::Error::other)?;
        serde_json::to_writer(&mut output, &DecisionMsg::from(decision))?;
        output.write_all(b"\n")?;
        output.flush()?;
        served += 1;
    }
    Ok(served)
}
