//! Dual-stream session log and its JSONL encoding.
//!
//! The first line is a header object carrying the format tag, session id,
//! seed, time base and an optional `meta` echo of the producing config. Every
//! following line is one chunk:
//!
//! ```text
//! {"i":0,"u":{"vad":true,"ann":"TURN_SPEECH"},"m":{"k":"THINK","t":null,"a":null}}
//! ```
//!
//! Feature vectors are written as `"f"` inside `"u"` only with
//! [`FeatureMode::Inline`].

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::frame::{Annotation, UserFrame};
use crate::time::TimeBase;
use crate::token::{Control, Token, AUDIO_TOKENS_PER_SPEAK_SLOT};

pub const LOG_FORMAT: &str = "duplexkit-log/1";

/// What the model emitted in one chunk.
///
/// `Speak` keeps its audio as a `Vec` so that malformed logs read from disk
/// can be represented and reported by [`crate::validate_log`]; the engine
/// always fills exactly four.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSlot {
    Think,
    Shift,
    Speak { text: u32, audio: Vec<u32> },
    Break,
}

impl ModelSlot {
    pub fn speak(text: u32, audio: [u32; AUDIO_TOKENS_PER_SPEAK_SLOT]) -> Self {
        ModelSlot::Speak {
            text,
            audio: audio.to_vec(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelSlot::Think => "THINK",
            ModelSlot::Shift => "SHIFT",
            ModelSlot::Speak { .. } => "SPEAK",
            ModelSlot::Break => "BREAK",
        }
    }

    pub fn control(&self) -> Option<Control> {
        match self {
            ModelSlot::Think => Some(Control::Think),
            ModelSlot::Shift => Some(Control::Shift),
            ModelSlot::Break => Some(Control::Break),
            ModelSlot::Speak { .. } => None,
        }
    }

    /// Tokens in emission order: the text token precedes the audio tokens.
    pub fn tokens(&self) -> Vec<Token> {
        match self {
            ModelSlot::Speak { text, audio } => std::iter::once(Token::Text(*text))
                .chain(audio.iter().map(|&a| Token::Audio(a)))
                .collect(),
            other => vec![Token::Control(other.control().expect("control slot"))],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkRecord {
    pub index: u64,
    pub user: UserFrame,
    pub model: ModelSlot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuplexLog {
    pub session_id: String,
    pub time_base: TimeBase,
    pub seed: u64,
    pub chunks: Vec<ChunkRecord>,
    /// Free-form provenance (resolved config, policy name) echoed into the header.
    pub meta: Option<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureMode {
    #[default]
    Omit,
    Inline,
}

#[derive(Debug, Error)]
pub enum LogFormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("log has no header line")]
    MissingHeader,
    #[error("unsupported log format {0:?}, expected {LOG_FORMAT:?}")]
    UnsupportedFormat(String),
    #[error("line {line}: {msg}")]
    BadSlot { line: usize, msg: String },
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    session_id: String,
    seed: u64,
    time_base: TimeBase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Value>,
}

#[derive(Serialize, Deserialize)]
struct RawUser {
    vad: bool,
    ann: Option<Annotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f: Option<Vec<f32>>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    k: String,
    t: Option<u32>,
    a: Option<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct RawChunk {
    i: u64,
    u: RawUser,
    m: RawModel,
}

impl RawModel {
    fn from_slot(slot: &ModelSlot) -> Self {
        match slot {
            ModelSlot::Speak { text, audio } => RawModel {
                k: "SPEAK".into(),
                t: Some(*text),
                a: Some(audio.clone()),
            },
            other => RawModel {
                k: other.kind().into(),
                t: None,
                a: None,
            },
        }
    }

    fn into_slot(self) -> Result<ModelSlot, String> {
        let control_only = |slot: ModelSlot, t: Option<u32>, a: &Option<Vec<u32>>| {
            if t.is_some() || a.is_some() {
                Err(format!("{} slot must not carry tokens", slot.kind()))
            } else {
                Ok(slot)
            }
        };
        match self.k.as_str() {
            "THINK" => control_only(ModelSlot::Think, self.t, &self.a),
            "SHIFT" => control_only(ModelSlot::Shift, self.t, &self.a),
            "BREAK" => control_only(ModelSlot::Break, self.t, &self.a),
            "SPEAK" => match (self.t, self.a) {
                (Some(text), Some(audio)) => Ok(ModelSlot::Speak { text, audio }),
                _ => Err("SPEAK slot needs both \"t\" and \"a\"".into()),
            },
            other => Err(format!("unknown slot kind {other:?}")),
        }
    }
}

impl DuplexLog {
    pub fn new(session_id: impl Into<String>, seed: u64) -> Self {
        Self {
            session_id: session_id.into(),
            time_base: TimeBase::default(),
            seed,
            chunks: Vec::new(),
            meta: None,
        }
    }

    pub fn slots(&self) -> impl Iterator<Item = &ModelSlot> {
        self.chunks.iter().map(|c| &c.model)
    }

    pub fn count_kind(&self, kind: &str) -> usize {
        self.slots().filter(|s| s.kind() == kind).count()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W, features: FeatureMode) -> io::Result<()> {
        let header = Header {
            format: LOG_FORMAT.to_string(),
            session_id: self.session_id.clone(),
            seed: self.seed,
            time_base: self.time_base,
            meta: self.meta.clone(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for chunk in &self.chunks {
            let raw = RawChunk {
                i: chunk.index,
                u: RawUser {
                    vad: chunk.user.vad,
                    ann: chunk.user.annotation,
                    f: match features {
                        FeatureMode::Inline => Some(chunk.user.feature.clone()),
                        FeatureMode::Omit => None,
                    },
                },
                m: RawModel::from_slot(&chunk.model),
            };
            serde_json::to_writer(&mut out, &raw)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self, features: FeatureMode) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf, features)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, LogFormatError> {
        let mut lines = input.lines().enumerate().filter(|(_, l)| match l {
            Ok(l) => !l.trim().is_empty(),
            Err(_) => true,
        });
        let (_, first) = lines.next().ok_or(LogFormatError::MissingHeader)?;
        let header: Header = serde_json::from_str(&first?)
            .map_err(|source| LogFormatError::Json { line: 1, source })?;
        if header.format != LOG_FORMAT {
            return Err(LogFormatError::UnsupportedFormat(header.format));
        }
        let mut chunks = Vec::new();
        for (n, line) in lines {
            let line_no = n + 1;
            let raw: RawChunk = serde_json::from_str(&line?).map_err(|source| {
                LogFormatError::Json {
                    line: line_no,
                    source,
                }
            })?;
            let model = raw
                .m
                .into_slot()
                .map_err(|msg| LogFormatError::BadSlot { line: line_no, msg })?;
            chunks.push(ChunkRecord {
                index: raw.i,
                user: UserFrame {
                    feature: raw.u.f.unwrap_or_default(),
                    vad: raw.u.vad,
                    annotation: raw.u.ann,
                },
                model,
            });
        }
        Ok(DuplexLog {
            session_id: header.session_id,
            time_base: header.time_base,
            seed: header.seed,
            chunks,
            meta: header.meta,
        })
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogFormatError> {
        Self::read_jsonl(text.as_bytes())
    }
}
