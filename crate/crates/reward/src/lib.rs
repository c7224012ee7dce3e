//! Composite reward for reasoning outputs of the form
//! `<think>…</think> … <answer>…</answer>`.
//!
//! `total = accuracy + format + consistency + thinking`, where the first
//! three are 0 or 1 and thinking moves in steps of 0.2. Totals are computed
//! in integer fifths so that every reported value is exact.

pub mod accuracy;
pub mod batch;
pub mod judge;
pub mod parse;
pub mod score;

pub use accuracy::{normalize, score_accuracy, OptionMap};
pub use batch::{
    read_items, score_batch, write_records, BatchSummary, RewardItem, RewardRecord, REWARD_FORMAT,
};
pub use judge::{
    serve_judge, ExternalJudge, Judge, JudgeError, JudgeRequest, JudgeVerdict, StubJudge,
    StubJudgeConfig, DEFAULT_JUDGE_TIMEOUT,
};
pub use parse::{parse_output, score_format, ModelOutput, Parsed};
pub use score::{score_total, score_with_judge, Flag, RewardBreakdown};
