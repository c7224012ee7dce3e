//! Judges for the consistency and thinking components.

use std::io::{self, BufRead, Write};
use std::sync::Mutex;
use std::time::Duration;

use duplexkit_core::LineChannel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accuracy::normalize;

pub const DEFAULT_JUDGE_TIMEOUT: Duration = Duration::from_secs(10);
pub const MAX_STEPS: u8 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeRequest {
    pub think: String,
    pub answer: String,
    pub gold: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub consistency: bool,
    /// Quality steps in `0..=5`, worth 0.2 each.
    #[serde(rename = "steps")]
    pub thinking_steps: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JudgeError {
    #[error("judge unavailable: {0}")]
    Unavailable(String),
}

pub trait Judge: Send + Sync {
    fn judge(&self, request: &JudgeRequest) -> Result<JudgeVerdict, JudgeError>;

    /// Whether verdicts come from outside the process.
    fn is_external(&self) -> bool {
        false
    }
}

/// Keyword rules of the deterministic stub judge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StubJudgeConfig {
    /// Reasoning connectives; one present passes the soundness check.
    pub connectives: Vec<String>,
    /// Words signalling that an option or step was ruled out.
    pub error_markers: Vec<String>,
    pub min_words: usize,
    pub max_words: usize,
}

impl Default for StubJudgeConfig {
    fn default() -> Self {
        let words = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect();
        Self {
            connectives: words(&["because", "so", "therefore", "since", "thus"]),
            error_markers: words(&["but", "however", "not", "wrong", "mistake"]),
            min_words: 3,
            max_words: 120,
        }
    }
}

/// Consistency: the answer's words occur as a contiguous run in the
/// reasoning. Thinking steps: one each for a connective, the gold answer in
/// the reasoning, an error marker, at least `min_words` words, and at most
/// `max_words` words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StubJudge {
    pub config: StubJudgeConfig,
}

fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn contains_run(hay: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

impl StubJudge {
    pub fn new(config: StubJudgeConfig) -> Self {
        Self { config }
    }

    pub fn verdict(&self, r: &JudgeRequest) -> JudgeVerdict {
        let think = words(&r.think);
        let has_any = |list: &[String]| list.iter().any(|w| think.contains(&w.to_lowercase()));
        let checks = [
            has_any(&self.config.connectives),
            contains_run(&think, &words(&normalize(&r.gold))),
            has_any(&self.config.error_markers),
            think.len() >= self.config.min_words,
            think.len() <= self.config.max_words,
        ];
        JudgeVerdict {
            consistency: contains_run(&think, &words(&normalize(&r.answer))),
            thinking_steps: checks.iter().filter(|&&c| c).count() as u8,
        }
    }
}

impl Judge for StubJudge {
    fn judge(&self, request: &JudgeRequest) -> Result<JudgeVerdict, JudgeError> {
        Ok(self.verdict(request))
    }
}

/// Judge reached over the line protocol. Connections are pooled and reused
/// across calls; a connection that fails is discarded.
pub struct ExternalJudge {
    target: String,
    timeout: Duration,
    pool: Mutex<Vec<LineChannel>>,
}

impl ExternalJudge {
    /// `target` is `host:port` or a command line.
    pub fn new(target: impl Into<String>, timeout: Duration) -> Self {
        Self {
            target: target.into(),
            timeout,
            pool: Mutex::new(Vec::new()),
        }
    }

    fn call(&self, ch: &mut LineChannel, request: &JudgeRequest) -> Result<JudgeVerdict, JudgeError> {
        let unavailable = |e: String| JudgeError::Unavailable(e);
        let line = serde_json::to_string(request).map_err(|e| unavailable(e.to_string()))?;
        let reply = ch.request(&line).map_err(|e| unavailable(e.to_string()))?;
        let v: JudgeVerdict = serde_json::from_str(reply.trim())
            .map_err(|e| unavailable(format!("bad verdict {reply:?}: {e}")))?;
        if v.thinking_steps > MAX_STEPS {
            return Err(unavailable(format!("steps {} out of range", v.thinking_steps)));
        }
        Ok(v)
    }
}

impl Judge for ExternalJudge {
    fn judge(&self, request: &JudgeRequest) -> Result<JudgeVerdict, JudgeError> {
        let pooled = self.pool.lock().expect("judge pool").pop();
        let mut ch = match pooled {
            Some(ch) => ch,
            None => LineChannel::open(&self.target, self.timeout)
                .map_err(|e| JudgeError::Unavailable(e.to_string()))?,
        };
        let verdict = self.call(&mut ch, request)?;
        self.pool.lock().expect("judge pool").push(ch);
        Ok(verdict)
    }

    fn is_external(&self) -> bool {
        true
    }
}

/// Answers judge requests from `input` until end of input.
pub fn serve_judge<J, R, W>(judge: &J, input: R, mut output: W) -> io::Result<u64>
where
    J: Judge + ?Sized,
    R: BufRead,
    W: Write,
{
    let mut served = 0;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: JudgeRequest = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        let verdict = judge.judge(&req).map_err(io::Error::other)?;
        serde_json::to_writer(&mut output, &verdict)?;
        output.write_all(b"\n")?;
        output.flush()?;
        served += 1;
    }
    Ok(served)
}
