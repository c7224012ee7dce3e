//! Attribute QA in three modality configurations sharing one answer text.

use std::collections::BTreeMap;

use duplexkit_core::AUDIO_CODEBOOK_SIZE;
use serde::{Deserialize, Serialize};

use crate::error::DatagenError;
use crate::sample::{InterleavedSample, Role, Scale, Segment};

pub const ATTRIBUTES: [&str; 5] = ["gender", "age", "emotion", "language", "speaker_count"];

/// Renders text as audio for queries and responses.
pub trait Synthesizer {
    /// Continuous-audio frame count for `text`.
    fn frames(&mut self, text: &str) -> u64;
    /// Discrete audio tokens for `text`.
    fn tokens(&mut self, text: &str) -> Vec<u32>;
}

/// Deterministic stand-in: one frame per four bytes, one token per byte.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlaceholderSynth;

impl Synthesizer for PlaceholderSynth {
    fn frames(&mut self, text: &str) -> u64 {
        (text.len() as u64).div_ceil(4).max(1)
    }

    fn tokens(&mut self, text: &str) -> Vec<u32> {
        text.bytes()
            .enumerate()
            .map(|(i, b)| (b as u32 * 64 + i as u32) % AUDIO_CODEBOOK_SIZE)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaTemplate {
    pub question: String,
    /// `{value}` is replaced with the label.
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaTemplates(pub BTreeMap<String, QaTemplate>);

impl Default for QaTemplates {
    fn default() -> Self {
        let rows = [
            ("gender", "What is the gender of the speaker?", "The speaker is {value}."),
            ("age", "How old does the speaker sound?", "The speaker sounds like {value}."),
            ("emotion", "What emotion does the speaker express?", "The speaker sounds {value}."),
            ("language", "Which language is being spoken?", "The speaker is speaking {value}."),
            ("speaker_count", "How many people are speaking?", "Number of speakers: {value}."),
        ];
        Self(
            rows.into_iter()
                .map(|(k, q, a)| (k.to_string(), QaTemplate { question: q.into(), answer: a.into() }))
                .collect(),
        )
    }
}

fn canonical(attribute: &str) -> String {
    attribute.trim().to_lowercase().replace([' ', '-'], "_")
}

/// Emits T2T `(a^S, t^Q) → t^R`, S2T `(a^S, a^Q) → t^R` and S2S
/// `(a^S, a^Q) → (t^R, a^R)` for one labelled source clip.
pub fn build_qa_triplets(
    source_ac_frames: u64,
    attribute: &str,
    value: &str,
    templates: &QaTemplates,
    synth: &mut dyn Synthesizer,
) -> Result<[InterleavedSample; 3], DatagenError> {
    let key = canonical(attribute);
    if !ATTRIBUTES.contains(&key.as_str()) {
        return Err(DatagenError::UnknownAttribute(attribute.to_string()));
    }
    let tpl = templates
        .0
        .get(&key)
        .ok_or_else(|| DatagenError::UnknownAttribute(attribute.to_string()))?;
    let answer = tpl.answer.replace("{value}", value);
    let span = (0, answer.len());
    let source = Segment::ac(Role::Query, source_ac_frames.max(1));
    let audio_query = Segment::ac(Role::Query, synth.frames(&tpl.question));
    let answer_seg = Segment::text(Role::Response, answer.clone()).with_span(span);

    let t2t = InterleavedSample::with_default_mask(
        vec![source.clone(), Segment::text(Role::Query, tpl.question.clone()), answer_seg.clone()],
        "qa-t2t",
        Scale::Sentence,
    );
    let s2t = InterleavedSample::with_default_mask(
        vec![source.clone(), audio_query.clone(), answer_seg.clone()],
        "qa-s2t",
        Scale::Sentence,
    );
    let s2s = InterleavedSample::with_default_mask(
        vec![
            source,
            audio_query,
            answer_seg.with_unit(0),
            Segment::ad(Role::Response, synth.tokens(&answer)).with_span(span).with_unit(0),
        ],
        "qa-s2s",
        Scale::Sentence,
    );
    for s in [&t2t, &s2t, &s2s] {
        s.validate()?;
    }
    Ok([t2t, s2t, s2s])
}
