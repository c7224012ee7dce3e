use std::path::PathBuf;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::Args;
use duplexkit_reward::{
    read_items, score_batch, write_records, BatchSummary, ExternalJudge, Judge, StubJudge, StubJudgeConfig,
    DEFAULT_JUDGE_TIMEOUT,
};
use serde::Serialize;
use serde_json::json;

use crate::config::FileConfig;
use crate::files::{open, write_atomic};
use crate::{CliResult, Failure, Globals};

#[derive(Debug, Args)]
pub struct ScoreRewardArgs {
    /// Items, one per line: {"id","output","gold","options"?}.
    #[arg(long, value_name = "FILE")]
    items: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// stub, or external:TARGET (host:port or a command).
    #[arg(long)]
    judge: Option<String>,
    /// Per-call timeout for an external judge.
    #[arg(long)]
    judge_timeout_ms: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Echo<'a> {
    command: &'static str,
    judge: &'a str,
    timeout_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stub: Option<&'a StubJudgeConfig>,
}

pub fn run(args: ScoreRewardArgs, file: &FileConfig, g: Globals) -> CliResult {
    let sec = &file.score_reward;
    let spec = args.judge.as_deref().or(sec.judge.as_deref()).unwrap_or("stub");
    let timeout_ms = args
        .judge_timeout_ms
        .or(sec.timeout_ms)
        .unwrap_or(DEFAULT_JUDGE_TIMEOUT.as_millis() as u64);
    let stub_config = sec.stub.clone().unwrap_or_default();
    let judge: Box<dyn Judge> = match spec.split_once(':') {
        None if spec == "stub" => Box::new(StubJudge::new(stub_config.clone())),
        Some(("external", target)) if !target.trim().is_empty() => {
            Box::new(ExternalJudge::new(target, Duration::from_millis(timeout_ms)))
        }
        _ => return Err(Failure::usage(anyhow!("judge must be stub or external:TARGET, got {spec:?}"))),
    };
    let echo = Echo {
        command: "score-reward",
        judge: spec,
        timeout_ms,
        stub: (!judge.is_external()).then_some(&stub_config),
    };

    let (items, malformed) = read_items(open(&args.items).map_err(Failure::usage)?)
        .with_context(|| format!("reading {}", args.items.display()))
        .map_err(Failure::usage)?;
    let records = score_batch(&items, judge.as_ref(), g.jobs);
    let summary = BatchSummary::new(&records, malformed);
    let meta = json!({ "config": echo, "summary": summary });
    write_atomic(&args.out, |w| write_records(w, &records, Some(&meta))).map_err(Failure::usage)?;
    println!("{}", serde_json::to_string(&summary).map_err(Failure::usage)?);
    if summary.judge_unavailable > 0 {
        return Err(Failure::runtime(anyhow!(
            "judge unavailable for {} items (scored 0 and flagged)",
            summary.judge_unavailable
        )));
    }
    Ok(())
}
