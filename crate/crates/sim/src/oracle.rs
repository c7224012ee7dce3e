//! Ground-truth policy built from scenario labels.

use std::collections::HashSet;

use duplexkit_core::{Mode, Observation, PolicyDecision, PolicyError, ResponsePolicy};

use crate::policy::placeholder_audio;
use crate::scenario::{Behavior, Scenario};

/// Takes the turn on every TURN_END chunk, speaks for the labelled response
/// length and yields one chunk after a barge-in onset. It reads only the chunk
/// index and mode, so it behaves the same in-process and over the wire.
#[derive(Debug, Clone, Default)]
pub struct OraclePolicy {
    take_at: HashSet<u64>,
    yield_at: HashSet<u64>,
}

impl OraclePolicy {
    pub fn new(scenario: &Scenario) -> Self {
        let mut take_at = HashSet::new();
        let mut yield_at = HashSet::new();
        for label in &scenario.labels {
            if label.behavior != Behavior::TurnTaking {
                continue;
            }
            let Some((_, last_speak)) = scenario.expected_response(label.event) else {
                continue;
            };
            let turn_end = scenario.events[label.event].start_chunk;
            let barge = scenario.labels.iter().find_map(|l| {
                (l.behavior == Behavior::Interruption && l.host == Some(label.event))
                    .then(|| scenario.events[l.event].start_chunk)
            });
            take_at.insert(turn_end);
            yield_at.insert(match barge {
                Some(onset) => onset + 1,
                None => last_speak + 1,
            });
        }
        Self { take_at, yield_at }
    }
}

impl ResponsePolicy for OraclePolicy {
    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
        let k = obs.state.chunk_index;
        Ok(match obs.state.mode {
            Mode::Listening if self.take_at.contains(&k) => PolicyDecision::TakeTurn,
            Mode::Listening => PolicyDecision::Hold,
            Mode::Speaking if self.yield_at.contains(&k) => PolicyDecision::Yield,
            Mode::Speaking => PolicyDecision::Continue {
                text: 0,
                audio: placeholder_audio(k),
            },
        })
    }
}
