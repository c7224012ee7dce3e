use std::io::{self, BufReader};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::Args;
use duplexkit_reward::{serve_judge, StubJudge};
use duplexkit_sim::scenario::read_scenarios;
use duplexkit_sim::{serve_policy, PolicySpec, Scenario};

use crate::config::FileConfig;
use crate::files::open;
use crate::{CliResult, Failure};

#[derive(Debug, Args)]
pub struct PolicyPeerArgs {
    /// oracle or threshold:T[:R].
    #[arg(long, default_value = "oracle")]
    policy: String,
    /// Scenario file; the oracle needs it to know the script.
    #[arg(long, value_name = "FILE")]
    scenarios: Option<PathBuf>,
    /// Session to serve.
    #[arg(long)]
    sid: Option<String>,
}

#[derive(Debug, Args)]
pub struct JudgePeerArgs {
    /// Listen on this address instead of stdin/stdout.
    #[arg(long, value_name = "HOST:PORT")]
    listen: Option<String>,
}

pub fn policy_peer(args: PolicyPeerArgs) -> CliResult {
    let spec: PolicySpec = args.policy.parse().map_err(Failure::usage)?;
    if spec.is_external() {
        return Err(Failure::usage(anyhow!("a peer cannot serve an external policy")));
    }
    let scenario = match (&args.scenarios, &args.sid) {
        (Some(path), Some(sid)) => read_scenarios(open(path).map_err(Failure::usage)?)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::usage)?
            .into_iter()
            .find(|s| &s.sid == sid)
            .ok_or_else(|| Failure::usage(anyhow!("no scenario {sid:?} in {}", path.display())))?,
        _ if matches!(spec, PolicySpec::Oracle) => {
            return Err(Failure::usage(anyhow!("the oracle needs --scenarios and --sid")));
        }
        (_, sid) => Scenario::empty(sid.clone().unwrap_or_default(), 0),
    };
    let mut policy = spec.instantiate(&scenario, Duration::ZERO).map_err(Failure::runtime)?;
    serve_policy(policy.as_mut(), io::stdin().lock(), io::stdout().lock()).map_err(Failure::runtime)?;
    Ok(())
}

pub fn judge_peer(args: JudgePeerArgs, file: &FileConfig) -> CliResult {
    let judge = Arc::new(StubJudge::new(file.score_reward.stub.clone().unwrap_or_default()));
    let Some(addr) = args.listen else {
        serve_judge(judge.as_ref(), io::stdin().lock(), io::stdout().lock()).map_err(Failure::runtime)?;
        return Ok(());
    };
    let listener = TcpListener::bind(&addr)
        .with_context(|| format!("binding {addr}"))
        .map_err(Failure::usage)?;
    eprintln!("judge listening on {}", listener.local_addr().map_err(Failure::runtime)?);
    for stream in listener.incoming() {
        let stream = stream.map_err(Failure::runtime)?;
        let judge = Arc::clone(&judge);
        std::thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(s) => BufReader::new(s),
                Err(e) => return eprintln!("connection: {e}"),
            };
            if let Err(e) = serve_judge(judge.as_ref(), reader, stream) {
                eprintln!("connection: {e}");
            }
        });
    }
    Ok(())
}
