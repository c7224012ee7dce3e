//! Policy specifications as accepted on the command line.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use duplexkit_core::{PolicyError, ResponsePolicy, AUDIO_CODEBOOK_SIZE, AUDIO_TOKENS_PER_SPEAK_SLOT};
use thiserror::Error;

use crate::oracle::OraclePolicy;
use crate::scenario::Scenario;
use crate::threshold::{ThresholdPolicy, DEFAULT_RESPONSE_CHUNKS};
use crate::wire::ExternalPolicy;

pub const DEFAULT_WIRE_TIMEOUT: Duration = Duration::from_millis(1000);

/// Audio ids for a placeholder SPEAK slot at `chunk`: `(chunk*4 + j) mod 16384`.
pub fn placeholder_audio(chunk: u64) -> [u32; AUDIO_TOKENS_PER_SPEAK_SLOT] {
    std::array::from_fn(|j| {
        ((chunk * AUDIO_TOKENS_PER_SPEAK_SLOT as u64 + j as u64) % AUDIO_CODEBOOK_SIZE as u64) as u32
    })
}

/// `oracle`, `threshold:T[:R]` or `external:TARGET`.
///
/// An external target is either `host:port` or a shell command line; `{sid}`
/// in a command is replaced with the scenario id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicySpec {
    Oracle,
    Threshold { silence_chunks: u64, response_chunks: u64 },
    External { target: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad policy spec {spec:?}: {reason}")]
pub struct PolicySpecError {
    pub spec: String,
    pub reason: String,
}

impl FromStr for PolicySpec {
    type Err = PolicySpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| PolicySpecError {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k, Some(r)),
            None => (s, None),
        };
        match (kind, rest) {
            ("oracle", None) => Ok(PolicySpec::Oracle),
            ("threshold", Some(rest)) => {
                let mut parts = rest.split(':');
                let parse = |p: Option<&str>| p.map(|v| v.trim().parse::<u64>());
                let silence = match parse(parts.next()) {
                    Some(Ok(t)) if t >= 1 => t,
                    _ => return Err(err("threshold must be an integer >= 1")),
                };
                let response = match parse(parts.next()) {
                    None => DEFAULT_RESPONSE_CHUNKS,
                    Some(Ok(r)) => r,
                    Some(Err(_)) => return Err(err("response length must be an integer")),
                };
                if parts.next().is_some() {
                    return Err(err("expected threshold:T or threshold:T:R"));
                }
                Ok(PolicySpec::Threshold {
                    silence_chunks: silence,
                    response_chunks: response,
                })
            }
            ("external", Some(target)) if !target.trim().is_empty() => Ok(PolicySpec::External {
                target: target.to_string(),
            }),
            _ => Err(err("expected oracle, threshold:T[:R] or external:TARGET")),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Oracle => f.write_str("oracle"),
            PolicySpec::Threshold {
                silence_chunks,
                response_chunks,
            } if *response_chunks == DEFAULT_RESPONSE_CHUNKS => write!(f, "threshold:{silence_chunks}"),
            PolicySpec::Threshold {
                silence_chunks,
                response_chunks,
            } => write!(f, "threshold:{silence_chunks}:{response_chunks}"),
            PolicySpec::External { target } => write!(f, "external:{target}"),
        }
    }
}

impl PolicySpec {
    pub fn is_external(&self) -> bool {
        matches!(self, PolicySpec::External { .. })
    }

    /// A fresh policy for one session of `scenario`.
    pub fn instantiate(
        &self,
        scenario: &Scenario,
        timeout: Duration,
    ) -> Result<Box<dyn ResponsePolicy>, PolicyError> {
        Ok(match self {
            PolicySpec::Oracle => Box::new(OraclePolicy::new(scenario)),
            PolicySpec::Threshold {
                silence_chunks,
                response_chunks,
            } => Box::new(ThresholdPolicy::with_response(*silence_chunks, *response_chunks)),
            PolicySpec::External { target } => {
                Box::new(ExternalPolicy::open(target, &scenario.sid, timeout)?)
            }
        })
    }
}
