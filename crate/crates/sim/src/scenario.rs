//! Scenario model and its JSONL file format.
//!
//! One scenario per line:
//! `{"sid":..,"seed":..,"events":[{"k":"USER_SPEECH","s":3,"n":12},..],"labels":[..],"h":120}`.
//! A file may start with a header line `{"format":"duplexkit-scenario/1",..}`.
//! `h` is the horizon in chunks; when absent it defaults to one chunk past the
//! last event or expected response.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const SCENARIO_FORMAT: &str = "duplexkit-scenario/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    UserSpeech,
    IntraTurnPause,
    /// One-chunk marker on the last chunk of a turn's final speech event.
    TurnEnd,
    BargeIn,
    Backchannel,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::UserSpeech => "USER_SPEECH",
            EventKind::IntraTurnPause => "INTRA_TURN_PAUSE",
            EventKind::TurnEnd => "TURN_END",
            EventKind::BargeIn => "BARGE_IN",
            EventKind::Backchannel => "BACKCHANNEL",
        }
    }

    /// The behavior an event of this kind is scored under, if any.
    pub fn behavior(self) -> Option<Behavior> {
        match self {
            EventKind::UserSpeech => None,
            EventKind::IntraTurnPause => Some(Behavior::PauseHandling),
            EventKind::TurnEnd => Some(Behavior::TurnTaking),
            EventKind::BargeIn => Some(Behavior::Interruption),
            EventKind::Backchannel => Some(Behavior::Backchanneling),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioEvent {
    #[serde(rename = "k")]
    pub kind: EventKind,
    #[serde(rename = "s")]
    pub start_chunk: u64,
    #[serde(rename = "n")]
    pub length_chunks: u64,
}

impl ScenarioEvent {
    pub fn new(kind: EventKind, start_chunk: u64, length_chunks: u64) -> Self {
        Self {
            kind,
            start_chunk,
            length_chunks,
        }
    }

    /// One past the last chunk.
    pub fn end(&self) -> u64 {
        self.start_chunk + self.length_chunks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Behavior {
    TurnTaking,
    PauseHandling,
    Backchanneling,
    Interruption,
}

impl Behavior {
    /// Column order of the behavior table.
    pub const ALL: [Behavior; 4] = [
        Behavior::TurnTaking,
        Behavior::PauseHandling,
        Behavior::Backchanneling,
        Behavior::Interruption,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Behavior::TurnTaking => "TURN_TAKING",
            Behavior::PauseHandling => "PAUSE_HANDLING",
            Behavior::Backchanneling => "BACKCHANNELING",
            Behavior::Interruption => "INTERRUPTION",
        }
    }
}

/// Accepted reaction delay after an event, in chunks, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReactionWindow {
    #[serde(rename = "min")]
    pub min_delay_chunks: u64,
    #[serde(rename = "max")]
    pub max_delay_chunks: u64,
}

impl Default for ReactionWindow {
    fn default() -> Self {
        Self {
            min_delay_chunks: 0,
            max_delay_chunks: 6,
        }
    }
}

impl ReactionWindow {
    pub fn new(min_delay_chunks: u64, max_delay_chunks: u64) -> Option<Self> {
        (min_delay_chunks <= max_delay_chunks).then_some(Self {
            min_delay_chunks,
            max_delay_chunks,
        })
    }

    pub fn contains_delay(&self, delay: u64) -> bool {
        (self.min_delay_chunks..=self.max_delay_chunks).contains(&delay)
    }
}

/// Ground truth for one scored event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub event: usize,
    pub behavior: Behavior,
    pub window: ReactionWindow,
    /// TURN_TAKING: first chunk of the user turn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_start: Option<u64>,
    /// TURN_TAKING: length of the expected model response in SPEAK slots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_chunks: Option<u64>,
    /// INTERRUPTION / BACKCHANNELING: index of the TURN_END event whose
    /// response this event overlaps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub sid: String,
    pub seed: u64,
    pub events: Vec<ScenarioEvent>,
    pub labels: Vec<Label>,
    #[serde(rename = "h", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("scenario {sid}: {msg}")]
    Invalid { sid: String, msg: String },
}

impl Scenario {
    pub fn empty(sid: impl Into<String>, seed: u64) -> Self {
        Self {
            sid: sid.into(),
            seed,
            events: Vec::new(),
            labels: Vec::new(),
            horizon: Some(0),
        }
    }

    /// Number of chunks covered by the scenario.
    pub fn horizon(&self) -> u64 {
        if let Some(h) = self.horizon {
            return h;
        }
        let events = self.events.iter().map(ScenarioEvent::end);
        // the expected response of a turn ends with a BREAK one chunk after its last SPEAK
        let responses = self.labels.iter().filter_map(|l| {
            let e = self.events.get(l.event)?;
            Some(e.start_chunk + l.response_chunks? + 2)
        });
        events.chain(responses).max().unwrap_or(0)
    }

    pub fn label_for(&self, event: usize) -> Option<&Label> {
        self.labels.iter().find(|l| l.event == event)
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = (usize, &ScenarioEvent)> {
        self.events
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.kind == kind)
    }

    /// Expected model speaking interval `[first SPEAK, last SPEAK]` answering
    /// the TURN_END event `turn_end`.
    pub fn expected_response(&self, turn_end: usize) -> Option<(u64, u64)> {
        let e = self.events.get(turn_end)?;
        let r = self.label_for(turn_end)?.response_chunks?;
        Some((e.start_chunk + 1, e.start_chunk + r))
    }

    fn invalid(&self, msg: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            sid: self.sid.clone(),
            msg: msg.into(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let horizon = self.horizon();
        let mut prev_start = 0;
        for (i, e) in self.events.iter().enumerate() {
            if e.length_chunks == 0 {
                return Err(self.invalid(format!("event {i} has zero length")));
            }
            if e.start_chunk < prev_start {
                return Err(self.invalid(format!("event {i} is out of order")));
            }
            prev_start = e.start_chunk;
            if e.end() > horizon {
                return Err(self.invalid(format!("event {i} ends past the horizon {horizon}")));
            }
        }

        // User-channel events other than the TURN_END marker never overlap.
        let channel: Vec<(usize, &ScenarioEvent)> = self
            .events
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind != EventKind::TurnEnd)
            .collect();
        for pair in channel.windows(2) {
            let ((i, a), (j, b)) = (pair[0], pair[1]);
            if b.start_chunk < a.end() {
                return Err(self.invalid(format!("events {i} and {j} overlap")));
            }
        }

        let is_turn_final = |speech: &ScenarioEvent| {
            self.events_of(EventKind::TurnEnd)
                .any(|(_, t)| t.start_chunk + 1 == speech.end())
        };
        for (pos, &(i, e)) in channel.iter().enumerate() {
            if e.kind != EventKind::IntraTurnPause {
                continue;
            }
            let before = pos.checked_sub(1).map(|p| channel[p].1);
            let after = channel.get(pos + 1).map(|c| c.1);
            let flanked = matches!(before, Some(b) if b.kind == EventKind::UserSpeech && b.end() == e.start_chunk && !is_turn_final(b))
                && matches!(after, Some(a) if a.kind == EventKind::UserSpeech && a.start_chunk == e.end());
            if !flanked {
                return Err(self.invalid(format!("pause {i} is not flanked by speech of one turn")));
            }
        }
        for (i, t) in self.events_of(EventKind::TurnEnd) {
            let on_speech = t.length_chunks == 1
                && self.events.iter().any(|s| {
                    s.kind == EventKind::UserSpeech && s.end() == t.start_chunk + 1
                });
            if !on_speech {
                return Err(self.invalid(format!(
                    "TURN_END {i} must mark the last chunk of a speech event"
                )));
            }
        }

        for (i, e) in self.events.iter().enumerate() {
            let Some(behavior) = e.kind.behavior() else {
                continue;
            };
            let n = self.labels.iter().filter(|l| l.event == i).count();
            if n != 1 {
                return Err(self.invalid(format!("event {i} needs exactly one label, has {n}")));
            }
            let label = self.label_for(i).expect("counted above");
            if label.behavior != behavior {
                return Err(self.invalid(format!("label for event {i} has the wrong behavior")));
            }
        }
        for l in &self.labels {
            let Some(e) = self.events.get(l.event) else {
                return Err(self.invalid(format!("label points at missing event {}", l.event)));
            };
            if l.window.min_delay_chunks > l.window.max_delay_chunks {
                return Err(self.invalid(format!("label for event {} has min > max", l.event)));
            }
            match l.behavior {
                Behavior::TurnTaking => {
                    if l.response_chunks.is_none() || l.turn_start.is_none() {
                        return Err(self.invalid(format!(
                            "turn label {} needs turn_start and response_chunks",
                            l.event
                        )));
                    }
                }
                Behavior::Interruption | Behavior::Backchanneling => {
                    let host = l.host.and_then(|h| self.expected_response(h));
                    let Some((first, last)) = host else {
                        return Err(self.invalid(format!("overlap event {} has no host turn", l.event)));
                    };
                    if e.start_chunk < first || e.start_chunk > last {
                        return Err(self.invalid(format!(
                            "overlap event {} starts outside the expected speaking interval",
                            l.event
                        )));
                    }
                }
                Behavior::PauseHandling => {}
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct FileHeader<'a> {
    format: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a Value>,
}

pub fn write_scenarios<W: Write>(
    mut out: W,
    scenarios: &[Scenario],
    config: Option<&Value>,
) -> io::Result<()> {
    serde_json::to_writer(
        &mut out,
        &FileHeader {
            format: SCENARIO_FORMAT,
            config,
        },
    )?;
    out.write_all(b"\n")?;
    for s in scenarios {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a scenario file, skipping an optional header line, and validates
/// every scenario.
pub fn read_scenarios<R: BufRead>(input: R) -> Result<Vec<Scenario>, ScenarioError> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|source| ScenarioError::Json { line: n + 1, source })?;
        if value.get("format").is_some() {
            continue;
        }
        let scenario: Scenario = serde_json::from_value(value)
            .map_err(|source| ScenarioError::Json { line: n + 1, source })?;
        scenario.validate()?;
        out.push(scenario);
    }
    Ok(out)
}
