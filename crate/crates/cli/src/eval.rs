use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::Args;
use duplexkit_core::DuplexLog;
use duplexkit_metrics::{aggregate, score_suite, MetricsReport, METRICS_FORMAT};
use duplexkit_sim::scenario::read_scenarios;
use duplexkit_sim::ReactionWindow;
use serde_json::json;

use crate::config::FileConfig;
use crate::files::{file_stem, open, write_atomic};
use crate::{CliResult, Failure};

const SYNTHETIC_NOTE: &str = "event lengths come from synthetic stand-in distributions; the reference column \
     reports a trained model on recorded speech and is not comparable";
const EXTERNAL_NOTE: &str = "some sessions used an external policy; they are not reproducible from the seed alone";

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of session logs (`*.jsonl`; partial logs are ignored).
    #[arg(long, value_name = "DIR")]
    logs: PathBuf,
    #[arg(long, value_name = "FILE")]
    scenarios: PathBuf,
    /// Reaction window in chunks, `MIN:MAX`.
    #[arg(long, value_name = "MIN:MAX")]
    window: Option<String>,
    /// Write the report as JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write a bar chart of the rates.
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Metrics report written by `eval --out`.
    #[arg(long, value_name = "FILE")]
    metrics: PathBuf,
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

fn parse_window(s: &str) -> anyhow::Result<ReactionWindow> {
    let (lo, hi) = s.split_once(':').context("window must be MIN:MAX")?;
    let lo = lo.trim().parse().context("window min")?;
    let hi = hi.trim().parse().context("window max")?;
    ReactionWindow::new(lo, hi).ok_or_else(|| anyhow!("window needs min <= max"))
}

fn read_logs(dir: &Path) -> anyhow::Result<Vec<DuplexLog>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        name.ends_with(".jsonl") && !name.ends_with(".partial.jsonl")
    });
    paths.sort();
    paths
        .iter()
        .map(|p| DuplexLog::read_jsonl(open(p)?).with_context(|| format!("reading {}", p.display())))
        .collect()
}

fn used_external(log: &DuplexLog) -> bool {
    log.meta
        .as_ref()
        .and_then(|m| m.pointer("/config/policy"))
        .and_then(|p| p.as_str())
        .is_some_and(|p| p.starts_with("external:"))
}

pub fn run(args: EvalArgs, file: &FileConfig) -> CliResult {
    let window = match &args.window {
        Some(w) => parse_window(w).map_err(Failure::usage)?,
        None => {
            let d = ReactionWindow::default();
            let lo = file.eval.window_min.unwrap_or(d.min_delay_chunks);
            let hi = file.eval.window_max.unwrap_or(d.max_delay_chunks);
            ReactionWindow::new(lo, hi)
                .ok_or_else(|| anyhow!("window needs min <= max"))
                .map_err(Failure::usage)?
        }
    };
    let scenarios = read_scenarios(open(&args.scenarios).map_err(Failure::usage)?)
        .with_context(|| format!("reading {}", args.scenarios.display()))
        .map_err(Failure::usage)?;
    let logs = read_logs(&args.logs).map_err(Failure::usage)?;

    let scenario_ids: BTreeSet<&str> = scenarios.iter().map(|s| s.sid.as_str()).collect();
    let log_ids: BTreeSet<&str> = logs.iter().map(|l| l.session_id.as_str()).collect();
    let orphans: Vec<String> = scenario_ids
        .symmetric_difference(&log_ids)
        .map(|sid| {
            let side = if log_ids.contains(sid) { "log without scenario" } else { "scenario without log" };
            format!("{sid} ({side})")
        })
        .collect();
    if !orphans.is_empty() {
        return Err(Failure::runtime(anyhow!("unpaired sessions: {}", orphans.join(", "))));
    }

    let set = score_suite(&logs, &scenarios, window).map_err(Failure::runtime)?;
    let mut report = aggregate(&set.outcomes, &set.defects);
    report.suite = file_stem(&args.scenarios);
    report.window = window;
    report.config = json!({ "command": "eval", "window": window });
    report.notes.push(SYNTHETIC_NOTE.to_string());
    if logs.iter().any(used_external) {
        report.notes.push(EXTERNAL_NOTE.to_string());
    }
    emit(&report, args.out.as_deref(), args.svg.as_deref())
}

fn emit(report: &MetricsReport, out: Option<&Path>, svg: Option<&Path>) -> CliResult {
    if let Some(path) = out {
        write_atomic(path, |w| {
            serde_json::to_writer_pretty(&mut *w, report)?;
            writeln!(w)
        })
        .map_err(Failure::usage)?;
    }
    if let Some(path) = svg {
        write_atomic(path, |w| w.write_all(report.to_svg().as_bytes())).map_err(Failure::usage)?;
    }
    print!("{}", report.to_table());
    Ok(())
}

pub fn report(args: ReportArgs) -> CliResult {
    let load = || -> anyhow::Result<MetricsReport> {
        let report: MetricsReport = serde_json::from_reader(open(&args.metrics)?)
            .with_context(|| format!("reading {}", args.metrics.display()))?;
        if report.format != METRICS_FORMAT {
            bail!("unsupported metrics format {:?}, expected {METRICS_FORMAT:?}", report.format);
        }
        Ok(report)
    };
    let report = load().map_err(Failure::usage)?;
    emit(&report, None, args.svg.as_deref())
}
