use duplexkit_core::{Control, DuplexLog};
use duplexkit_sim::{frames_of, Behavior, ReactionWindow, Scenario};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorOutcome {
    pub session_id: String,
    pub behavior: Behavior,
    pub event_ref: usize,
    pub success: bool,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reaction_chunks: Option<u64>,
}

/// A scored event that could not be tested in this run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defect {
    pub session_id: String,
    pub behavior: Behavior,
    pub event_ref: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("{sid}: chunk {chunk} has no annotation")]
    MissingAnnotations { sid: String, chunk: u64 },
    #[error("{sid}: chunk {chunk} annotated {found} but the scenario says {expected}")]
    AnnotationMismatch {
        sid: String,
        chunk: u64,
        expected: String,
        found: String,
    },
    #[error("{sid}: {msg}")]
    LogMismatch { sid: String, msg: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub outcomes: Vec<BehaviorOutcome>,
    pub defects: Vec<Defect>,
}

impl ScoreSet {
    fn extend(&mut self, other: ScoreSet) {
        self.outcomes.extend(other.outcomes);
        self.defects.extend(other.defects);
    }
}

/// Control symbol per chunk, checked against the scenario it claims to replay.
struct Track {
    controls: Vec<Option<Control>>,
}

impl Track {
    fn new(log: &DuplexLog, scenario: &Scenario) -> Result<Self, MetricsError> {
        let sid = || scenario.sid.clone();
        if log.session_id != scenario.sid {
            return Err(MetricsError::LogMismatch {
                sid: sid(),
                msg: format!("log belongs to session {}", log.session_id),
            });
        }
        let expected = frames_of(scenario);
        if log.chunks.len() != expected.len() {
            return Err(MetricsError::LogMismatch {
                sid: sid(),
                msg: format!("log has {} chunks, scenario horizon is {}", log.chunks.len(), expected.len()),
            });
        }
        for (c, want) in log.chunks.iter().zip(&expected) {
            let Some(found) = c.user.annotation else {
                return Err(MetricsError::MissingAnnotations { sid: sid(), chunk: c.index });
            };
            if Some(found) != want.annotation {
                return Err(MetricsError::AnnotationMismatch {
                    sid: sid(),
                    chunk: c.index,
                    expected: format!("{:?}", want.annotation),
                    found: format!("{found:?}"),
                });
            }
        }
        Ok(Self {
            controls: log.chunks.iter().map(|c| c.model.control()).collect(),
        })
    }

    fn find(&self, what: Control, from: u64, to: u64) -> Option<u64> {
        let to = to.min(self.controls.len() as u64);
        (from..to).find(|&k| self.controls[k as usize] == Some(what))
    }

    fn any(&self, what: Control, from: u64, to: u64) -> bool {
        self.find(what, from, to).is_some()
    }

    /// Whether the model was SPEAKING when frame `chunk` arrived.
    fn speaking_at(&self, chunk: u64) -> bool {
        let end = (chunk as usize).min(self.controls.len());
        self.controls[..end]
            .iter()
            .rev()
            .find_map(|c| match c {
                Some(Control::Shift) => Some(true),
                Some(Control::Break) => Some(false),
                _ => None,
            })
            .unwrap_or(false)
    }
}

fn outcome(
    s: &Scenario,
    behavior: Behavior,
    event_ref: usize,
    success: bool,
    detail: &str,
    reaction_chunks: Option<u64>,
) -> BehaviorOutcome {
    BehaviorOutcome {
        session_id: s.sid.clone(),
        behavior,
        event_ref,
        success,
        detail: detail.to_string(),
        reaction_chunks,
    }
}

fn labelled(s: &Scenario, behavior: Behavior) -> impl Iterator<Item = usize> + '_ {
    s.labels
        .iter()
        .filter(move |l| l.behavior == behavior)
        .map(|l| l.event)
        .filter(|&i| i < s.events.len())
}

fn score_turn_taking_on(track: &Track, s: &Scenario, window: ReactionWindow) -> ScoreSet {
    let mut set = ScoreSet::default();
    for i in labelled(s, Behavior::TurnTaking) {
        let e = s.events[i].start_chunk;
        let start = s.label_for(i).and_then(|l| l.turn_start).unwrap_or(e);
        let o = if track.any(Control::Shift, start, e) {
            outcome(s, Behavior::TurnTaking, i, false, "premature response", None)
        } else {
            match track.find(Control::Shift, e, u64::MAX) {
                Some(k) if window.contains_delay(k - e) => {
                    outcome(s, Behavior::TurnTaking, i, true, "response in window", Some(k - e))
                }
                Some(_) | None => outcome(s, Behavior::TurnTaking, i, false, "no response", None),
            }
        };
        set.outcomes.push(o);
    }
    set
}

fn score_pause_handling_on(track: &Track, s: &Scenario) -> ScoreSet {
    let mut set = ScoreSet::default();
    for i in labelled(s, Behavior::PauseHandling) {
        let ev = &s.events[i];
        let o = if track.any(Control::Shift, ev.start_chunk, ev.end()) {
            outcome(s, Behavior::PauseHandling, i, false, "shift during pause", None)
        } else {
            outcome(s, Behavior::PauseHandling, i, true, "held through pause", None)
        };
        set.outcomes.push(o);
    }
    set
}

/// Overlap event at `onset` while the model was not speaking: either it
/// yielded early or the event was never testable.
fn not_speaking(track: &Track, s: &Scenario, behavior: Behavior, i: usize, onset: u64, set: &mut ScoreSet) {
    let host_end = s
        .label_for(i)
        .and_then(|l| l.host)
        .and_then(|h| s.events.get(h))
        .map(|h| h.start_chunk);
    match host_end {
        Some(e) if track.any(Control::Break, e, onset) => {
            set.outcomes.push(outcome(s, behavior, i, false, "yield before event", None));
        }
        _ => set.defects.push(Defect {
            session_id: s.sid.clone(),
            behavior,
            event_ref: i,
            detail: "event not during speaking".into(),
        }),
    }
}

fn score_interruption_on(track: &Track, s: &Scenario, window: ReactionWindow) -> ScoreSet {
    let mut set = ScoreSet::default();
    for i in labelled(s, Behavior::Interruption) {
        let onset = s.events[i].start_chunk;
        if !track.speaking_at(onset) {
            not_speaking(track, s, Behavior::Interruption, i, onset, &mut set);
            continue;
        }
        let o = match track.find(Control::Break, onset, u64::MAX) {
            Some(k) if window.contains_delay(k - onset) => {
                outcome(s, Behavior::Interruption, i, true, "yield in window", Some(k - onset))
            }
            Some(k) if k - onset < window.min_delay_chunks => {
                outcome(s, Behavior::Interruption, i, false, "yield too early", None)
            }
            Some(_) => outcome(s, Behavior::Interruption, i, false, "late yield", None),
            None => outcome(s, Behavior::Interruption, i, false, "no yield", None),
        };
        set.outcomes.push(o);
    }
    set
}

fn score_backchanneling_on(track: &Track, s: &Scenario, window: ReactionWindow) -> ScoreSet {
    let mut set = ScoreSet::default();
    for i in labelled(s, Behavior::Backchanneling) {
        let ev = &s.events[i];
        let onset = ev.start_chunk;
        if !track.speaking_at(onset) {
            not_speaking(track, s, Behavior::Backchanneling, i, onset, &mut set);
            continue;
        }
        let guard_end = ev.end() + window.max_delay_chunks;
        let o = if track.any(Control::Break, onset, guard_end + 1) {
            outcome(s, Behavior::Backchanneling, i, false, "yield on backchannel", None)
        } else {
            outcome(s, Behavior::Backchanneling, i, true, "kept speaking", None)
        };
        set.outcomes.push(o);
    }
    set
}

/// Turn-taking: a SHIFT within `window` of each TURN_END and none earlier in
/// the turn.
pub fn score_turn_taking(log: &DuplexLog, s: &Scenario, window: ReactionWindow) -> Result<ScoreSet, MetricsError> {
    Ok(score_turn_taking_on(&Track::new(log, s)?, s, window))
}

/// Pause handling: no SHIFT inside any intra-turn pause.
pub fn score_pause_handling(log: &DuplexLog, s: &Scenario) -> Result<ScoreSet, MetricsError> {
    Ok(score_pause_handling_on(&Track::new(log, s)?, s))
}

/// Interruption: a BREAK within `window` of a barge-in onset that met a
/// speaking model.
pub fn score_interruption(log: &DuplexLog, s: &Scenario, window: ReactionWindow) -> Result<ScoreSet, MetricsError> {
    Ok(score_interruption_on(&Track::new(log, s)?, s, window))
}

/// Backchanneling: no BREAK from onset through `onset + len + window.max`.
pub fn score_backchanneling(log: &DuplexLog, s: &Scenario, window: ReactionWindow) -> Result<ScoreSet, MetricsError> {
    Ok(score_backchanneling_on(&Track::new(log, s)?, s, window))
}

/// All four behaviors, outcomes in event order.
pub fn score_session(log: &DuplexLog, s: &Scenario, window: ReactionWindow) -> Result<ScoreSet, MetricsError> {
    let track = Track::new(log, s)?;
    let mut set = score_turn_taking_on(&track, s, window);
    set.extend(score_pause_handling_on(&track, s));
    set.extend(score_backchanneling_on(&track, s, window));
    set.extend(score_interruption_on(&track, s, window));
    set.outcomes.sort_by_key(|o| o.event_ref);
    set.defects.sort_by_key(|d| d.event_ref);
    Ok(set)
}

/// Scores every scenario against the log with the same session id.
pub fn score_suite(logs: &[DuplexLog], scenarios: &[Scenario], window: ReactionWindow) -> Result<ScoreSet, MetricsError> {
    let mut set = ScoreSet::default();
    for s in scenarios {
        let log = logs
            .iter()
            .find(|l| l.session_id == s.sid)
            .ok_or_else(|| MetricsError::LogMismatch {
                sid: s.sid.clone(),
                msg: "no log for this scenario".into(),
            })?;
        set.extend(score_session(log, s, window)?);
    }
    Ok(set)
}
