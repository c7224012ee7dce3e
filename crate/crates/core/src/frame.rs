use serde::{Deserialize, Serialize};

/// Ground-truth label attached to frames that come from a scripted scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Annotation {
    TurnSpeech,
    IntraTurnPause,
    TurnEnd,
    BargeIn,
    Backchannel,
    Silence,
}

impl Annotation {
    pub fn as_str(self) -> &'static str {
        match self {
            Annotation::TurnSpeech => "TURN_SPEECH",
            Annotation::IntraTurnPause => "INTRA_TURN_PAUSE",
            Annotation::TurnEnd => "TURN_END",
            Annotation::BargeIn => "BARGE_IN",
            Annotation::Backchannel => "BACKCHANNEL",
            Annotation::Silence => "SILENCE",
        }
    }
}

/// One user-stream frame, i.e. one chunk of continuous input.
///
/// `feature` stands in for the 6.25 Hz encoder output; its length is a
/// simulation parameter and it may be empty when a log was written without
/// features.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserFrame {
    pub feature: Vec<f32>,
    pub vad: bool,
    pub annotation: Option<Annotation>,
}

impl UserFrame {
    pub fn new(vad: bool) -> Self {
        Self {
            feature: Vec::new(),
            vad,
            annotation: None,
        }
    }

    pub fn annotated(vad: bool, annotation: Annotation) -> Self {
        Self {
            feature: Vec::new(),
            vad,
            annotation: Some(annotation),
        }
    }
}
