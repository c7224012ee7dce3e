use std::path::PathBuf;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::Args;
use duplexkit_core::FeatureMode;
use duplexkit_sim::scenario::{read_scenarios, write_scenarios};
use duplexkit_sim::{generate_suite, run_suite, PolicySpec, SuiteConfig};
use serde::Serialize;
use serde_json::json;

use crate::config::{suite_config, FileConfig};
use crate::files::{open, write_atomic};
use crate::{CliResult, Failure, Globals};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file to play.
    #[arg(long, value_name = "FILE", conflicts_with = "generate")]
    scenarios: Option<PathBuf>,
    /// Generate scenarios; comma-separated key=value overrides such as
    /// `scenarios=10,turns=3,pause_len=1-8`.
    #[arg(long, value_name = "KEY=VALUE,...", num_args = 0..=1, default_missing_value = "")]
    generate: Option<String>,
    /// oracle, threshold:T[:R] or external:TARGET (a host:port or a command;
    /// `{sid}` in a command is replaced with the session id).
    #[arg(long)]
    policy: Option<String>,
    /// Output directory: scenarios.jsonl plus logs/<sid>.jsonl.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Per-decision timeout for external policies.
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Whether logs carry user feature vectors.
    #[arg(long, value_parser = ["omit", "inline"])]
    features: Option<String>,
}

#[derive(Debug, Serialize)]
struct Echo<'a> {
    command: &'static str,
    seed: u64,
    policy: String,
    timeout_ms: u64,
    features: &'a str,
    generate: Option<&'a SuiteConfig>,
}

pub fn run(args: SimulateArgs, file: &FileConfig, g: Globals) -> CliResult {
    let sec = &file.simulate;
    let policy: PolicySpec = args
        .policy
        .as_deref()
        .or(sec.policy.as_deref())
        .unwrap_or("oracle")
        .parse()
        .map_err(Failure::usage)?;
    let timeout_ms = args.timeout_ms.or(sec.timeout_ms).unwrap_or(1000);
    let features = args.features.as_deref().or(sec.features.as_deref()).unwrap_or("omit");
    let mode = match features {
        "omit" => FeatureMode::Omit,
        "inline" => FeatureMode::Inline,
        other => return Err(Failure::usage(anyhow!("features must be omit or inline, got {other:?}"))),
    };

    let mut generated = None;
    let scenarios = match (&args.scenarios, &args.generate, &sec.generate) {
        (Some(path), _, _) => read_scenarios(open(path).map_err(Failure::usage)?)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::usage)?,
        (None, None, None) => {
            return Err(Failure::usage(anyhow!("give --scenarios FILE or --generate")));
        }
        (None, spec, table) => {
            let cfg = suite_config(table.as_ref(), spec.as_deref(), g.seed).map_err(Failure::usage)?;
            let suite = generate_suite(&cfg).map_err(Failure::usage)?;
            generated = Some(cfg);
            suite
        }
    };

    let echo = serde_json::to_value(Echo {
        command: "simulate",
        seed: g.seed,
        policy: policy.to_string(),
        timeout_ms,
        features,
        generate: generated.as_ref(),
    })
    .map_err(Failure::usage)?;

    let result = run_suite(&scenarios, &policy, Duration::from_millis(timeout_ms));

    write_atomic(&args.out.join("scenarios.jsonl"), |w| write_scenarios(w, &scenarios, Some(&echo)))
        .map_err(Failure::usage)?;
    let logs_dir = args.out.join("logs");
    let completed = result.logs.len();
    for mut log in result.logs {
        log.meta = Some(json!({ "config": echo }));
        let path = logs_dir.join(format!("{}.jsonl", log.session_id));
        write_atomic(&path, |w| log.write_jsonl(w, mode)).map_err(Failure::usage)?;
    }
    for e in &result.errors {
        let mut partial = e.partial.clone();
        partial.meta = Some(json!({ "config": echo, "error": e.error.to_string() }));
        let path = logs_dir.join(format!("{}.partial.jsonl", partial.session_id));
        write_atomic(&path, |w| partial.write_jsonl(w, mode)).map_err(Failure::usage)?;
        eprintln!("session {}: {}", partial.session_id, e.error);
    }
    println!(
        "simulated {} scenarios with {}: {} completed, {} failed",
        scenarios.len(),
        policy,
        completed,
        result.errors.len()
    );
    if result.errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::runtime(anyhow!("{} sessions failed", result.errors.len())))
    }
}
