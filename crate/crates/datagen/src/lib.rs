//! Training-sequence construction over three modalities: continuous audio
//! placeholders (`a_c`), discrete audio tokens (`a_d`) and text (`t`).
//!
//! Text is tokenized at byte level, so a T segment holding `n` bytes occupies
//! `n` positions. AC segments occupy one position per frame and AD segments one
//! per token. Every sample carries a loss mask over the flattened positions.

pub mod decouple;
pub mod error;
pub mod interleave;
pub mod pattern;
pub mod qa;
pub mod recipe;
pub mod sample;
pub mod segment;
pub mod stratify;

pub use decouple::{build_pseudo_dialogue, ContextTemplate, TtsAttrs, TtsRecord};
pub use error::DatagenError;
pub use interleave::{allocate_proportional, apply_recipe, build_interleaved, SampleInputs};
pub use pattern::{Atom, Pattern, FORMULAS};
pub use qa::{build_qa_triplets, PlaceholderSynth, QaTemplates, Synthesizer, ATTRIBUTES};
pub use recipe::{post_training_tasks, pretraining_stage2_tasks, MixtureSampler, Task, TaskRecipe};
pub use sample::{
    read_samples, write_samples, InterleavedSample, Modality, Payload, Role, Scale, Segment,
    SAMPLES_FORMAT,
};
pub use segment::segment_transcript;
pub use stratify::{stratified_sample, water_fill, StratKey};
