//! Scenario generation and session driving for the duplex engine.
//!
//! Scenarios are scripted user timelines on the chunk clock. They carry
//! ground-truth labels for the four scored behaviors (turn-taking, pause
//! handling, interruption, backchanneling). [`frames_of`] turns a scenario
//! into a user stream and [`run`] plays it against a policy. Time is purely
//! virtual: chunk `k` is `k * 0.16 s` regardless of wall clock.

#![allow(clippy::result_large_err)]

pub mod frames;
pub mod generate;
pub mod oracle;
pub mod policy;
pub mod runner;
pub mod scenario;
pub mod threshold;
pub mod wire;

pub use frames::{frames_of, frames_of_dim, DEFAULT_FEATURE_DIM};
pub use generate::{generate_suite, GenerateError, LenRange, SuiteConfig};
pub use oracle::OraclePolicy;
pub use policy::{placeholder_audio, PolicySpec, PolicySpecError};
pub use runner::{run, run_suite, SuiteRun};
pub use scenario::{
    Behavior, EventKind, Label, ReactionWindow, Scenario, ScenarioError, ScenarioEvent,
    SCENARIO_FORMAT,
};
pub use threshold::ThresholdPolicy;
pub use wire::{serve_policy, DecisionMsg, ExternalPolicy, ObsMsg, WireObs};
