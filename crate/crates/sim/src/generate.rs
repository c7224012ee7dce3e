//! Seeded scenario suites.
//!
//! Each scenario is laid out turn by turn on the chunk clock:
//!
//! ```text
//! gap | speech (pause speech)* | response (backchannels, barge-in) | gap | ...
//!                          ^ TURN_END on the last speech chunk
//! ```
//!
//! The expected model response to a turn ending at chunk `e` is `SHIFT` at
//! `e`, `R` SPEAK slots at `e+1 ..= e+R` and `BREAK` at `e+R+1`. Backchannels
//! are placed so that no BREAK is expected from their onset through
//! `onset + len + window.max`; a barge-in opens the next user turn inside the
//! response. The length distributions are synthetic stand-ins, not measured
//! conversational statistics.

use duplexkit_core::seed::derive_seed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{Behavior, EventKind, Label, ReactionWindow, Scenario, ScenarioEvent};

/// Inclusive length range in chunks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LenRange {
    pub min: u64,
    pub max: u64,
}

impl LenRange {
    pub const fn new(min: u64, max: u64) -> Self {
        Self { min, max }
    }

    pub const fn fixed(n: u64) -> Self {
        Self { min: n, max: n }
    }

    fn draw(&self, rng: &mut impl Rng) -> u64 {
        rng.random_range(self.min..=self.max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub scenarios: usize,
    /// Per-scenario event counts.
    pub turns: u32,
    pub pauses: u32,
    pub barge_ins: u32,
    pub backchannels: u32,
    pub speech_len: LenRange,
    pub pause_len: LenRange,
    pub backchannel_len: LenRange,
    pub barge_in_len: LenRange,
    pub response_len: LenRange,
    pub gap_len: LenRange,
    pub window: ReactionWindow,
    pub seed: u64,
    pub sid_prefix: String,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            scenarios: 1,
            turns: 3,
            pauses: 1,
            barge_ins: 0,
            backchannels: 0,
            speech_len: LenRange::new(5, 40),
            pause_len: LenRange::new(1, 8),
            backchannel_len: LenRange::new(1, 4),
            barge_in_len: LenRange::new(4, 20),
            response_len: LenRange::new(8, 40),
            gap_len: LenRange::new(2, 10),
            window: ReactionWindow::default(),
            seed: 0,
            sid_prefix: "s".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("infeasible suite config: {0}")]
    InfeasibleConfig(String),
}

fn infeasible(msg: impl Into<String>) -> GenerateError {
    GenerateError::InfeasibleConfig(msg.into())
}

impl SuiteConfig {
    pub fn check(&self) -> Result<(), GenerateError> {
        if self.scenarios == 0 {
            return Err(infeasible("scenarios must be at least 1"));
        }
        let ranges = [
            ("speech_len", self.speech_len),
            ("pause_len", self.pause_len),
            ("backchannel_len", self.backchannel_len),
            ("barge_in_len", self.barge_in_len),
            ("response_len", self.response_len),
        ];
        for (name, r) in ranges {
            if r.min == 0 || r.min > r.max {
                return Err(infeasible(format!("{name} must satisfy 1 <= min <= max")));
            }
        }
        if self.gap_len.min > self.gap_len.max {
            return Err(infeasible("gap_len must satisfy min <= max"));
        }
        if self.window.min_delay_chunks != 0 || self.window.max_delay_chunks == 0 {
            return Err(infeasible("generation window needs min = 0 and max >= 1"));
        }
        if self.turns == 0 && (self.pauses > 0 || self.backchannels > 0) {
            return Err(infeasible("pauses and backchannels need at least one turn"));
        }
        if self.barge_ins as u64 > (self.turns as u64).saturating_sub(1) {
            return Err(infeasible(format!(
                "{} barge-ins need at least {} turns (a barge-in opens the next turn inside a response)",
                self.barge_ins,
                self.barge_ins + 1
            )));
        }
        if self.barge_ins > 0 && self.barge_in_len.min + self.speech_len.min < 3 {
            return Err(infeasible(
                "barge_in_len.min + speech_len.min must be at least 3",
            ));
        }
        Ok(())
    }
}

/// Generates `config.scenarios` scenarios. Scenario `i` depends only on
/// `(config, i)`.
pub fn generate_suite(config: &SuiteConfig) -> Result<Vec<Scenario>, GenerateError> {
    config.check()?;
    Ok((0..config.scenarios)
        .map(|i| generate_one(config, i as u64))
        .collect())
}

fn generate_one(cfg: &SuiteConfig, index: u64) -> Scenario {
    let seed = derive_seed(cfg.seed, "scenario", index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sid = format!("{}{:05}", cfg.sid_prefix, index);
    let turns = cfg.turns as usize;
    if turns == 0 {
        return Scenario::empty(sid, seed);
    }

    let mut pauses_in = vec![0u32; turns];
    for _ in 0..cfg.pauses {
        pauses_in[rng.random_range(0..turns)] += 1;
    }
    let mut barged = vec![false; turns];
    let mut candidates: Vec<usize> = (1..turns).collect();
    candidates.shuffle(&mut rng);
    for &t in candidates.iter().take(cfg.barge_ins as usize) {
        barged[t] = true;
    }
    let mut backchannels_in = vec![0u32; turns];
    for _ in 0..cfg.backchannels {
        backchannels_in[rng.random_range(0..turns)] += 1;
    }

    let window = cfg.window;
    let label = |event, behavior| Label {
        event,
        behavior,
        window,
        turn_start: None,
        response_chunks: None,
        host: None,
    };
    let mut events: Vec<ScenarioEvent> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut cursor = cfg.gap_len.draw(&mut rng);
    let mut pending_barge: Option<(u64, usize)> = None;
    let mut horizon = 0;

    for turn in 0..turns {
        let turn_start = match (barged[turn], pending_barge.take()) {
            (true, Some((onset, host))) => {
                let n = cfg.barge_in_len.draw(&mut rng);
                labels.push(Label {
                    host: Some(host),
                    ..label(events.len(), Behavior::Interruption)
                });
                events.push(ScenarioEvent::new(EventKind::BargeIn, onset, n));
                cursor = onset + n;
                onset
            }
            _ => cursor,
        };

        let pauses = pauses_in[turn];
        for j in 0..=pauses {
            let s = cfg.speech_len.draw(&mut rng);
            events.push(ScenarioEvent::new(EventKind::UserSpeech, cursor, s));
            cursor += s;
            if j < pauses {
                let p = cfg.pause_len.draw(&mut rng);
                labels.push(label(events.len(), Behavior::PauseHandling));
                events.push(ScenarioEvent::new(EventKind::IntraTurnPause, cursor, p));
                cursor += p;
            }
        }
        let turn_end = cursor - 1;
        let turn_end_idx = events.len();
        events.push(ScenarioEvent::new(EventKind::TurnEnd, turn_end, 1));

        // Place overlap events inside the response, then size the response to hold them.
        let mut free = turn_end + 1;
        let mut needed = 1;
        let mut overlaps = Vec::new();
        for _ in 0..backchannels_in[turn] {
            let onset = free + rng.random_range(0..=2);
            let len = cfg.backchannel_len.draw(&mut rng);
            overlaps.push((onset, len));
            free = onset + len + window.max_delay_chunks;
            needed = free - turn_end;
        }
        if turn + 1 < turns && barged[turn + 1] {
            let onset = free + rng.random_range(0..=2);
            needed = needed.max(onset - turn_end);
            pending_barge = Some((onset, turn_end_idx));
        }
        let response = cfg.response_len.draw(&mut rng).max(needed);
        labels.push(Label {
            turn_start: Some(turn_start),
            response_chunks: Some(response),
            ..label(turn_end_idx, Behavior::TurnTaking)
        });
        for (onset, len) in overlaps {
            labels.push(Label {
                host: Some(turn_end_idx),
                ..label(events.len(), Behavior::Backchanneling)
            });
            events.push(ScenarioEvent::new(EventKind::Backchannel, onset, len));
        }
        // SHIFT at turn_end, SPEAK for `response` chunks, BREAK, then silence
        cursor = turn_end + response + 2 + cfg.gap_len.draw(&mut rng);
        horizon = cursor;
    }

    labels.sort_by_key(|l| l.event);
    Scenario {
        sid,
        seed,
        events,
        labels,
        horizon: Some(horizon),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SuiteConfig {
        SuiteConfig::default()
    }

    #[test]
    fn minimal_single_turn() {
        let suite = generate_suite(&SuiteConfig {
            turns: 1,
            pauses: 0,
            seed: 7,
            ..cfg()
        })
        .unwrap();
        assert_eq!(suite.len(), 1);
        let s = &suite[0];
        assert_eq!(s.events_of(EventKind::TurnEnd).count(), 1);
        assert_eq!(s.labels.len(), 1);
        assert_eq!(s.labels[0].behavior, Behavior::TurnTaking);
        s.validate().unwrap();
    }

    #[test]
    fn fixed_pause_length_is_honoured() {
        let suite = generate_suite(&SuiteConfig {
            turns: 2,
            pauses: 1,
            pause_len: LenRange::fixed(3),
            ..cfg()
        })
        .unwrap();
        let pauses: Vec<_> = suite[0].events_of(EventKind::IntraTurnPause).collect();
        assert_eq!(pauses.len(), 1);
        let (idx, pause) = pauses[0];
        assert_eq!(pause.length_chunks, 3);
        assert_eq!(suite[0].label_for(idx).unwrap().behavior, Behavior::PauseHandling);
    }

    #[test]
    fn barge_in_without_turns_is_infeasible() {
        let err = generate_suite(&SuiteConfig {
            turns: 0,
            pauses: 0,
            barge_ins: 1,
            ..cfg()
        })
        .unwrap_err();
        assert!(matches!(err, GenerateError::InfeasibleConfig(_)));
        assert!(generate_suite(&SuiteConfig { turns: 1, barge_ins: 1, ..cfg() }).is_err());
        assert!(generate_suite(&SuiteConfig { scenarios: 0, ..cfg() }).is_err());
    }

    #[test]
    fn zero_turns_gives_empty_scenarios() {
        let suite = generate_suite(&SuiteConfig { turns: 0, pauses: 0, ..cfg() }).unwrap();
        assert!(suite[0].events.is_empty());
        assert_eq!(suite[0].horizon(), 0);
    }

    #[test]
    fn counts_match_config_and_scenarios_validate() {
        let config = SuiteConfig {
            scenarios: 40,
            turns: 4,
            pauses: 3,
            barge_ins: 2,
            backchannels: 3,
            seed: 99,
            ..cfg()
        };
        for s in generate_suite(&config).unwrap() {
            s.validate().unwrap();
            assert_eq!(s.events_of(EventKind::TurnEnd).count(), 4);
            assert_eq!(s.events_of(EventKind::IntraTurnPause).count(), 3);
            assert_eq!(s.events_of(EventKind::BargeIn).count(), 2);
            assert_eq!(s.events_of(EventKind::Backchannel).count(), 3);
            for (i, bc) in s.events_of(EventKind::Backchannel) {
                let host = s.label_for(i).unwrap().host.unwrap();
                let (_, last) = s.expected_response(host).unwrap();
                assert!(bc.end() + config.window.max_delay_chunks <= last);
            }
        }
    }

    #[test]
    fn suite_is_a_pure_function_of_config() {
        let config = SuiteConfig { scenarios: 5, backchannels: 2, barge_ins: 1, seed: 3, ..cfg() };
        assert_eq!(generate_suite(&config).unwrap(), generate_suite(&config).unwrap());
        let more = SuiteConfig { scenarios: 8, ..config.clone() };
        assert_eq!(generate_suite(&more).unwrap()[..5], generate_suite(&config).unwrap()[..]);
    }
}
