//! Operator surface for the duplexkit crates.
//!
//! Every subcommand resolves its parameters from built-in defaults, then the
//! `--config` TOML file, then command-line flags, and echoes the resolved
//! values (never file paths) into the header of each file it writes.

pub mod config;
mod data;
mod eval;
mod files;
mod peer;
mod reward;
mod simulate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::FileConfig;

/// Failure classes mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed inputs. Exit code 1.
    Usage(anyhow::Error),
    /// Session, pairing or scoring errors. Exit code 2.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }

    pub fn runtime(e: impl Into<anyhow::Error>) -> Self {
        Failure::Runtime(e.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Runtime(e) => e,
        }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

fn formats_help() -> String {
    format!(
        "File formats (tag in the first line of each file):\n  \
         scenarios        {}\n  \
         session logs     {}\n  \
         metrics reports  {}\n  \
         samples          {}\n  \
         reward records   {}\n\n\
         Exit codes: 0 success, 1 usage or input error, 2 session or scoring error.",
        duplexkit_sim::SCENARIO_FORMAT,
        duplexkit_core::LOG_FORMAT,
        duplexkit_metrics::METRICS_FORMAT,
        duplexkit_datagen::SAMPLES_FORMAT,
        duplexkit_reward::REWARD_FORMAT,
    )
}

#[derive(Debug, Parser)]
#[command(name = "duplexkit", version, about = "Full-duplex dialogue simulation, scoring and data tools")]
#[command(after_help = formats_help())]
pub struct Cli {
    /// TOML file with defaults; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed; every random choice derives from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sessions and batch scoring.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a policy over scenarios and write one session log per scenario.
    Simulate(simulate::SimulateArgs),
    /// Score session logs against their scenarios.
    Eval(eval::EvalArgs),
    /// Render a saved metrics report as a table and optionally SVG.
    Report(eval::ReportArgs),
    /// Build interleaved training samples from a TTS corpus.
    BuildData(data::BuildDataArgs),
    /// Score reasoning outputs with the composite reward.
    ScoreReward(reward::ScoreRewardArgs),
    /// Serve a built-in policy over stdin/stdout for external-policy runs.
    PolicyPeer(peer::PolicyPeerArgs),
    /// Serve the stub judge over stdin/stdout or TCP.
    JudgePeer(peer::JudgePeerArgs),
}

/// Globals after merging the config file.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub seed: u64,
    pub jobs: usize,
}

pub fn run(cli: Cli) -> CliResult {
    let file = FileConfig::load(cli.config.as_deref()).map_err(Failure::usage)?;
    let globals = Globals {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        jobs: cli
            .jobs
            .or(file.jobs)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1),
    };
    // Already initialized when called twice in one process; the first pool stays.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(globals.jobs).build_global();
    match cli.command {
        Command::Simulate(a) => simulate::run(a, &file, globals),
        Command::Eval(a) => eval::run(a, &file),
        Command::Report(a) => eval::report(a),
        Command::BuildData(a) => data::run(a, &file, globals),
        Command::ScoreReward(a) => reward::run(a, &file, globals),
        Command::PolicyPeer(a) => peer::policy_peer(a),
        Command::JudgePeer(a) => peer::judge_peer(a, &file),
    }
}
