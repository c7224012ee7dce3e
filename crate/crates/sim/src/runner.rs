//! Session driving over scenarios.

use std::time::Duration;

use duplexkit_core::{
    run_session, DuplexLog, EngineConfig, EngineError, ResponsePolicy, SessionError,
};
use rayon::prelude::*;

use crate::frames::frames_of;
use crate::policy::PolicySpec;
use crate::scenario::Scenario;

/// Plays `scenario` against `policy`. Each logged user frame keeps its
/// scenario annotation.
pub fn run<P: ResponsePolicy + ?Sized>(
    scenario: &Scenario,
    policy: &mut P,
) -> Result<DuplexLog, SessionError> {
    run_session(
        &scenario.sid,
        scenario.seed,
        frames_of(scenario),
        policy,
        EngineConfig::default(),
    )
}

#[derive(Debug, Default)]
pub struct SuiteRun {
    /// Completed sessions, sorted by session id.
    pub logs: Vec<DuplexLog>,
    /// Failed sessions, sorted by session id.
    pub errors: Vec<SessionError>,
}

/// Runs every scenario with a fresh policy from `spec` on the current rayon
/// pool.
pub fn run_suite(scenarios: &[Scenario], spec: &PolicySpec, timeout: Duration) -> SuiteRun {
    let results: Vec<Result<DuplexLog, SessionError>> = scenarios
        .par_iter()
        .map(|s| match spec.instantiate(s, timeout) {
            Ok(mut policy) => run(s, &mut policy),
            Err(source) => Err(SessionError {
                error: EngineError::Policy { chunk: 0, source },
                partial: DuplexLog::new(s.sid.clone(), s.seed),
            }),
        })
        .collect();
    let mut out = SuiteRun::default();
    for r in results {
        match r {
            Ok(log) => out.logs.push(log),
            Err(e) => out.errors.push(e),
        }
    }
    out.logs.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    out.errors
        .sort_by(|a, b| a.partial.session_id.cmp(&b.partial.session_id));
    out
}
