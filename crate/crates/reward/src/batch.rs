//! JSONL batch scoring.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::accuracy::OptionMap;
use crate::judge::Judge;
use crate::parse::parse_output;
use crate::score::{score_total, Flag};

pub const REWARD_FORMAT: &str = "duplexkit-reward/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardItem {
    pub id: String,
    pub output: String,
    pub gold: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionMap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRecord {
    pub id: String,
    pub acc: u8,
    pub fmt: u8,
    pub cons: u8,
    pub think: f64,
    pub total: f64,
    pub flags: Vec<Flag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub scored: usize,
    /// Input lines that were not valid items.
    pub malformed: usize,
    pub missing_answer: usize,
    pub judge_unavailable: usize,
    pub mean_total: Option<f64>,
}

impl BatchSummary {
    pub fn new(records: &[RewardRecord], malformed: usize) -> Self {
        let flagged = |f| records.iter().filter(|r| r.flags.contains(&f)).count();
        let mean_total = (!records.is_empty())
            .then(|| records.iter().map(|r| r.total).sum::<f64>() / records.len() as f64);
        Self {
            scored: records.len(),
            malformed,
            missing_answer: flagged(Flag::MissingAnswer),
            judge_unavailable: flagged(Flag::JudgeUnavailable),
            mean_total,
        }
    }
}

/// Reads items, returning them with the number of malformed lines skipped.
/// Blank lines and a leading format header are ignored.
pub fn read_items<R: BufRead>(r: R) -> io::Result<(Vec<RewardItem>, usize)> {
    let mut items = Vec::new();
    let mut malformed = 0;
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Value>(&line) {
            Ok(v) if v.get("format").is_some() && v.get("id").is_none() => {}
            Ok(v) => match serde_json::from_value(v) {
                Ok(item) => items.push(item),
                Err(_) => malformed += 1,
            },
            Err(_) => malformed += 1,
        }
    }
    Ok((items, malformed))
}

/// Scores items with at most `jobs` judge calls in flight. Records keep the
/// input order.
pub fn score_batch(items: &[RewardItem], judge: &dyn Judge, jobs: usize) -> Vec<RewardRecord> {
    let score = |item: &RewardItem| {
        let b = score_total(&parse_output(&item.output), &item.gold, item.options.as_ref(), judge);
        RewardRecord {
            id: item.id.clone(),
            acc: b.accuracy,
            fmt: b.format,
            cons: b.consistency,
            think: b.thinking,
            total: b.total,
            flags: b.flags,
        }
    };
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(score).collect()),
        Err(_) => items.iter().map(score).collect(),
    }
}

/// Writes a header line carrying the format tag and `meta`, then one record
/// per line.
pub fn write_records<W: Write>(mut w: W, records: &[RewardRecord], meta: Option<&Value>) -> io::Result<()> {
    let mut header = serde_json::json!({ "format": REWARD_FORMAT });
    if let Some(m) = meta {
        header["meta"] = m.clone();
    }
    writeln!(w, "{header}")?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
