//! Behavior scoring for duplex session logs.
//!
//! Every scored scenario event yields one [`BehaviorOutcome`]. Overlap events
//! that never met a speaking model are [`Defect`]s and stay out of the rates.

pub mod report;
pub mod score;

pub use report::{aggregate, BehaviorStats, MetricsReport, METRICS_FORMAT};
pub use score::{
    score_backchanneling, score_interruption, score_pause_handling, score_session, score_suite,
    score_turn_taking, BehaviorOutcome, Defect, MetricsError, ScoreSet,
};
