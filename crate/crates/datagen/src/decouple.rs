//! Pseudo-dialogues from TTS records. The response text is context only;
//! the loss falls on the response audio alone.

use serde::{Deserialize, Serialize};

use crate::error::DatagenError;
use crate::interleave::SampleInputs;
use crate::sample::{InterleavedSample, Role, Scale, Segment};

pub const PSEUDO_DIALOGUE_RECIPE: &str = "pseudo-dialogue";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TtsAttrs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
}

/// One corpus line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TtsRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default)]
    pub text: String,
    #[serde(rename = "ad", default)]
    pub audio_tokens: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ac_frames: Option<u64>,
    #[serde(rename = "speaker", default, skip_serializing_if = "Option::is_none")]
    pub speaker_id: Option<String>,
    #[serde(default)]
    pub attrs: TtsAttrs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_ac_frames: Option<u64>,
}

impl TtsRecord {
    pub fn inputs(&self) -> SampleInputs {
        SampleInputs {
            transcript: Some(self.text.clone()).filter(|t| !t.is_empty()),
            ad_tokens: Some(self.audio_tokens.clone()).filter(|t| !t.is_empty()),
            ac_frames: self.ac_frames,
            aux_ac_frames: self.aux_ac_frames,
            prompt: self.prompt.clone(),
        }
    }
}

/// Stand-in for the user turn preceding the synthesized response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextTemplate {
    pub ac_frames: u64,
}

impl Default for ContextTemplate {
    fn default() -> Self {
        Self { ac_frames: 32 }
    }
}

/// `[AC context] [T text | AD audio]` with loss bits on the audio only.
pub fn build_pseudo_dialogue(
    record: &TtsRecord,
    context: &ContextTemplate,
) -> Result<InterleavedSample, DatagenError> {
    if record.audio_tokens.is_empty() {
        return Err(DatagenError::EmptyAudio);
    }
    let span = (0, record.text.len());
    let segs = vec![
        Segment::ac(Role::Context, context.ac_frames.max(1)),
        Segment::text(Role::Response, record.text.clone()).with_span(span).with_unit(0),
        Segment::ad(Role::Response, record.audio_tokens.clone()).with_span(span).with_unit(0),
    ];
    let mut mask = vec![false; context.ac_frames.max(1) as usize + record.text.len()];
    mask.extend(std::iter::repeat_n(true, record.audio_tokens.len()));
    let sample = InterleavedSample {
        id: record.id.clone(),
        segs,
        mask,
        recipe: PSEUDO_DIALOGUE_RECIPE.into(),
        scale: Scale::Sentence,
    };
    sample.validate()?;
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_counts_audio_only() {
        let rec = TtsRecord {
            text: "x".repeat(20),
            audio_tokens: (0..100).collect(),
            ..Default::default()
        };
        let s = build_pseudo_dialogue(&rec, &ContextTemplate::default()).unwrap();
        assert_eq!(s.mask_count(), 100);
        assert!(s.mask_of(1).iter().all(|&b| !b));
        assert!(s.mask_of(2).iter().all(|&b| b));
        assert_eq!(s.segs[0].role, Role::Context);
        assert_eq!(s.transcript(), rec.text);
    }

    #[test]
    fn empty_audio_rejected() {
        let rec = TtsRecord { text: "hi".into(), ..Default::default() };
        assert_eq!(build_pseudo_dialogue(&rec, &ContextTemplate::default()), Err(DatagenError::EmptyAudio));
        let rec = TtsRecord { text: "hi".into(), audio_tokens: vec![20000], ..Default::default() };
        assert!(matches!(
            build_pseudo_dialogue(&rec, &ContextTemplate::default()),
            Err(DatagenError::InvalidSample(_))
        ));
    }

    #[test]
    fn corpus_line_shape() {
        let line = r#"{"text":"Hi.","ad":[1,2],"ac_frames":3,"speaker":"spk1","attrs":{"age":"adult","lang":"en","gender":"female"}}"#;
        let r: TtsRecord = serde_json::from_str(line).unwrap();
        assert_eq!(r.speaker_id.as_deref(), Some("spk1"));
        assert_eq!(r.attrs.gender.as_deref(), Some("female"));
        assert_eq!(serde_json::to_string(&r).unwrap(), line);
    }
}
