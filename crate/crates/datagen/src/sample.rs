//! Segments, samples and their JSONL form.

use std::io::{BufRead, Write};

use duplexkit_core::AUDIO_CODEBOOK_SIZE;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::DatagenError;

pub const SAMPLES_FORMAT: &str = "duplexkit-samples/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    AC,
    AD,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Role {
    Query,
    Response,
    Context,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scale {
    Phrase,
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "m")]
pub enum Payload {
    /// Continuous-audio placeholder: only the frame count is kept.
    #[serde(rename = "AC")]
    Ac { frames: u64 },
    #[serde(rename = "AD")]
    Ad { tokens: Vec<u32> },
    #[serde(rename = "T")]
    T { text: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub role: Role,
    /// Byte range of the source transcript this segment renders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(usize, usize)>,
    /// Segments sharing a unit id form one paired (`x|y`) unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<u32>,
    #[serde(flatten)]
    pub payload: Payload,
}

impl Segment {
    pub fn ac(role: Role, frames: u64) -> Self {
        Self { role, span: None, unit: None, payload: Payload::Ac { frames } }
    }

    pub fn ad(role: Role, tokens: Vec<u32>) -> Self {
        Self { role, span: None, unit: None, payload: Payload::Ad { tokens } }
    }

    pub fn text(role: Role, text: impl Into<String>) -> Self {
        Self { role, span: None, unit: None, payload: Payload::T { text: text.into() } }
    }

    pub fn with_span(mut self, span: (usize, usize)) -> Self {
        self.span = Some(span);
        self
    }

    pub fn with_unit(mut self, unit: u32) -> Self {
        self.unit = Some(unit);
        self
    }

    pub fn modality(&self) -> Modality {
        match self.payload {
            Payload::Ac { .. } => Modality::AC,
            Payload::Ad { .. } => Modality::AD,
            Payload::T { .. } => Modality::T,
        }
    }

    /// Token positions the segment occupies.
    pub fn positions(&self) -> usize {
        match &self.payload {
            Payload::Ac { frames } => *frames as usize,
            Payload::Ad { tokens } => tokens.len(),
            Payload::T { text } => text.len(),
        }
    }

    /// Default loss participation: response text and discrete audio.
    pub fn trains_by_default(&self) -> bool {
        self.role == Role::Response && self.modality() != Modality::AC
    }
}

mod bits {
    use super::*;

    pub fn serialize<S: Serializer>(mask: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(mask.iter().map(|&b| b as u8))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let raw = Vec::<u8>::deserialize(d)?;
        raw.into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!("mask bit {other}"))),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleavedSample {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub segs: Vec<Segment>,
    #[serde(with = "bits")]
    pub mask: Vec<bool>,
    pub recipe: String,
    pub scale: Scale,
}

impl InterleavedSample {
    /// Builds a sample whose mask follows [`Segment::trains_by_default`].
    pub fn with_default_mask(segs: Vec<Segment>, recipe: impl Into<String>, scale: Scale) -> Self {
        let mask = segs
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.trains_by_default(), s.positions()))
            .collect();
        Self { id: None, segs, mask, recipe: recipe.into(), scale }
    }

    pub fn positions(&self) -> usize {
        self.segs.iter().map(Segment::positions).sum()
    }

    /// Mask bits of segment `i`.
    pub fn mask_of(&self, i: usize) -> &[bool] {
        let start: usize = self.segs[..i].iter().map(Segment::positions).sum();
        &self.mask[start..start + self.segs[i].positions()]
    }

    pub fn mask_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Concatenated text of the spanned T segments, in order.
    pub fn transcript(&self) -> String {
        self.segs
            .iter()
            .filter(|s| s.span.is_some())
            .filter_map(|s| match &s.payload {
                Payload::T { text } => Some(text.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        let bad = |m: String| Err(DatagenError::InvalidSample(m));
        if self.mask.len() != self.positions() {
            return bad(format!("mask has {} bits for {} positions", self.mask.len(), self.positions()));
        }
        let mut last_t_end = 0;
        for (i, seg) in self.segs.iter().enumerate() {
            if seg.role != Role::Response && self.mask_of(i).iter().any(|&b| b) {
                return bad(format!("segment {i} is {:?} but has loss bits", seg.role));
            }
            match &seg.payload {
                Payload::Ad { tokens } => {
                    if let Some(t) = tokens.iter().find(|&&t| t >= AUDIO_CODEBOOK_SIZE) {
                        return bad(format!("segment {i}: audio token {t} out of range"));
                    }
                }
                Payload::T { text } => {
                    if let Some((a, b)) = seg.span {
                        if a < last_t_end || b < a || b - a != text.len() {
                            return bad(format!("segment {i}: text span {a}..{b} out of order"));
                        }
                        last_t_end = b;
                    }
                }
                Payload::Ac { .. } => {}
            }
        }
        Ok(())
    }
}

pub fn write_samples<W: Write>(
    mut w: W,
    samples: &[InterleavedSample],
    meta: Option<&Value>,
) -> std::io::Result<()> {
    let mut header = serde_json::json!({ "format": SAMPLES_FORMAT });
    if let Some(m) = meta {
        header["meta"] = m.clone();
    }
    writeln!(w, "{header}")?;
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Reads samples, skipping the header line.
pub fn read_samples<R: BufRead>(r: R) -> Result<Vec<InterleavedSample>, String> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", n + 1))?;
        if let Some(f) = v.get("format") {
            if f != SAMPLES_FORMAT {
                return Err(format!("unsupported format {f}"));
            }
            continue;
        }
        out.push(serde_json::from_value(v).map_err(|e| format!("line {}: {e}", n + 1))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> InterleavedSample {
        InterleavedSample::with_default_mask(
            vec![
                Segment::ac(Role::Query, 3).with_span((0, 3)),
                Segment::text(Role::Response, "Hi.").with_span((0, 3)).with_unit(0),
                Segment::ad(Role::Response, vec![1, 16383]).with_span((0, 3)).with_unit(0),
            ],
            "demo",
            Scale::Sentence,
        )
    }

    #[test]
    fn json_shape() {
        let s = sample();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"segs":[{"role":"QUERY","span":[0,3],"m":"AC","frames":3},{"role":"RESPONSE","span":[0,3],"unit":0,"m":"T","text":"Hi."},{"role":"RESPONSE","span":[0,3],"unit":0,"m":"AD","tokens":[1,16383]}],"mask":[0,0,0,1,1,1,1,1],"recipe":"demo","scale":"SENTENCE"}"#
        );
        let back: InterleavedSample = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(serde_json::to_string(&back).unwrap(), j);
    }

    #[test]
    fn validation_catches_bad_masks() {
        let mut s = sample();
        s.validate().unwrap();
        assert_eq!(s.mask_count(), 5);
        s.mask[0] = true;
        assert!(s.validate().is_err());
        s.mask.pop();
        assert!(s.validate().is_err());
        let mut s = sample();
        s.segs[2].payload = Payload::Ad { tokens: vec![16384, 0] };
        assert!(s.validate().is_err());
    }

    #[test]
    fn file_round_trip() {
        let mut buf = Vec::new();
        write_samples(&mut buf, &[sample(), sample()], None).unwrap();
        let back = read_samples(buf.as_slice()).unwrap();
        assert_eq!(back, vec![sample(), sample()]);
        assert!(read_samples(&b"{\"mask\":[2]}\n"[..]).is_err());
    }
}
