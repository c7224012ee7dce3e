use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::Args;
use duplexkit_core::seed::{derive_seed, mix64};
use duplexkit_datagen::{
    apply_recipe, build_pseudo_dialogue, build_qa_triplets, post_training_tasks, pretraining_stage2_tasks,
    stratified_sample, write_samples, ContextTemplate, InterleavedSample, MixtureSampler, PlaceholderSynth,
    QaTemplates, Scale, StratKey, Synthesizer, Task, TtsRecord,
};
use serde::Serialize;
use serde_json::json;

use crate::config::FileConfig;
use crate::files::{open, write_atomic};
use crate::{CliResult, Failure, Globals};

const VERIFY_DRAWS: usize = 100_000;
const VERIFY_TOLERANCE: f64 = 0.01;

#[derive(Debug, Args)]
pub struct BuildDataArgs {
    /// TTS corpus, one JSON record per line: text, ad, ac_frames, attrs, ...
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Output sample file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Number of mixture draws.
    #[arg(long)]
    samples: Option<usize>,
    /// Task table: post (post-training) or pretrain (second pre-training stage).
    #[arg(long, value_parser = ["post", "pretrain"])]
    mixture: Option<String>,
    /// Comma-separated task weights replacing the table's, in task order.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Fraction of mixture samples aligned at phrase rather than sentence scale.
    #[arg(long)]
    phrase_ratio: Option<f64>,
    /// Also emit one pseudo-dialogue per record with audio.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pseudo_dialogue: Option<bool>,
    /// Also emit attribute QA triplets for each labelled record.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    qa: Option<bool>,
    /// Pick this many records, balanced by age, then language, then gender.
    #[arg(long)]
    budget: Option<usize>,
    /// Print the mixture plan and exit.
    #[arg(long)]
    dry_run: bool,
    /// Check 100,000 draws against the task weights (within 0.01) and exit.
    #[arg(long)]
    verify_mixture: bool,
}

#[derive(Debug, Serialize)]
struct Echo {
    command: &'static str,
    seed: u64,
    samples: usize,
    mixture: String,
    tasks: Vec<Task>,
    phrase_ratio: f64,
    pseudo_dialogue: bool,
    qa: bool,
    budget: Option<usize>,
    priority: Vec<StratKey>,
    context_frames: u64,
}

fn resolve(args: &BuildDataArgs, file: &FileConfig, seed: u64) -> anyhow::Result<Echo> {
    let sec = &file.build_data;
    let mixture = args.mixture.clone().or(sec.mixture.clone()).unwrap_or_else(|| "post".into());
    let mut tasks = match (&sec.tasks, mixture.as_str()) {
        (Some(t), _) => t.clone(),
        (None, "post") => post_training_tasks(),
        (None, "pretrain") => pretraining_stage2_tasks(),
        (None, other) => bail!("unknown mixture {other:?}"),
    };
    if let Some(w) = args.weights.as_ref().or(sec.weights.as_ref()) {
        if w.len() != tasks.len() {
            bail!("{} weights given for {} tasks", w.len(), tasks.len());
        }
        for (t, &w) in tasks.iter_mut().zip(w) {
            t.weight = w;
        }
    }
    let phrase_ratio = args.phrase_ratio.or(sec.phrase_ratio).unwrap_or(0.5);
    if !(0.0..=1.0).contains(&phrase_ratio) {
        bail!("phrase ratio must lie in [0, 1]");
    }
    Ok(Echo {
        command: "build-data",
        seed,
        samples: args.samples.or(sec.samples).unwrap_or(1000),
        mixture,
        tasks,
        phrase_ratio,
        pseudo_dialogue: args.pseudo_dialogue.or(sec.pseudo_dialogue).unwrap_or(true),
        qa: args.qa.or(sec.qa).unwrap_or(false),
        budget: args.budget.or(sec.budget),
        priority: sec.priority.clone().unwrap_or(StratKey::DEFAULT_PRIORITY.to_vec()),
        context_frames: sec.context_frames.unwrap_or(ContextTemplate::default().ac_frames),
    })
}

fn read_corpus(path: &Path) -> anyhow::Result<Vec<TtsRecord>> {
    let mut out = Vec::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value =
            serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), n + 1))?;
        if v.get("format").is_some() {
            continue;
        }
        out.push(serde_json::from_value(v).with_context(|| format!("{} line {}", path.display(), n + 1))?);
    }
    if out.is_empty() {
        bail!("{} holds no records", path.display());
    }
    Ok(out)
}

/// Uniform in `[0, 1)` from a derived seed.
fn unit(seed: u64) -> f64 {
    (mix64(seed) >> 11) as f64 / (1u64 << 53) as f64
}

fn verify(sampler: &mut MixtureSampler, tasks: &[Task]) -> CliResult {
    // Recipes carry their task's name, so counting by name merges formulas.
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..VERIFY_DRAWS {
        *counts.entry(sampler.draw().name.clone()).or_default() += 1;
    }
    let mut worst: f64 = 0.0;
    println!("{:<28} {:>8} {:>9} {:>8}", "task", "weight", "observed", "diff");
    for t in tasks {
        let observed = counts.get(&t.name).copied().unwrap_or(0) as f64 / VERIFY_DRAWS as f64;
        let diff = observed - t.weight;
        worst = worst.max(diff.abs());
        println!("{:<28} {:>8.4} {:>9.4} {:>+8.4}", t.name, t.weight, observed, diff);
    }
    if worst <= VERIFY_TOLERANCE {
        println!("mixture ok: max deviation {worst:.4} over {VERIFY_DRAWS} draws");
        Ok(())
    } else {
        Err(Failure::runtime(anyhow!("max deviation {worst:.4} exceeds {VERIFY_TOLERANCE}")))
    }
}

pub fn run(args: BuildDataArgs, file: &FileConfig, g: Globals) -> CliResult {
    let echo = resolve(&args, file, g.seed).map_err(Failure::usage)?;
    let mut sampler =
        MixtureSampler::from_tasks(&echo.tasks, derive_seed(g.seed, "mixture", 0)).map_err(Failure::usage)?;
    if args.dry_run {
        println!("{:<28} {:<16} {:>8} {:>10}", "task", "formula", "weight", "expected");
        for r in sampler.recipes() {
            let expected = r.mix_weight * echo.samples as f64;
            println!("{:<28} {:<16} {:>8.4} {:>10.1}", r.name, r.pattern.to_string(), r.mix_weight, expected);
        }
        return Ok(());
    }
    if args.verify_mixture {
        return verify(&mut sampler, &echo.tasks);
    }
    let corpus_path = args.corpus.as_ref().ok_or_else(|| Failure::usage(anyhow!("--corpus is required")))?;
    let out = args.out.as_ref().ok_or_else(|| Failure::usage(anyhow!("--out is required")))?;
    let corpus = read_corpus(corpus_path).map_err(Failure::usage)?;

    let picked: Vec<&TtsRecord> = match echo.budget {
        Some(budget) => {
            let attrs: Vec<_> = corpus.iter().map(|r| r.attrs.clone()).collect();
            stratified_sample(&attrs, budget, &echo.priority, derive_seed(g.seed, "stratify", 0))
                .map_err(Failure::usage)?
                .into_iter()
                .map(|i| &corpus[i])
                .collect()
        }
        None => corpus.iter().collect(),
    };

    let mut samples: Vec<InterleavedSample> = Vec::new();
    let mut per_recipe: BTreeMap<String, usize> = BTreeMap::new();
    let mut unrealizable: BTreeMap<String, usize> = BTreeMap::new();
    for i in 0..echo.samples as u64 {
        let recipe = sampler.draw().clone();
        let scale = if unit(derive_seed(g.seed, "scale", i)) < echo.phrase_ratio {
            Scale::Phrase
        } else {
            Scale::Sentence
        };
        let start = (derive_seed(g.seed, "record", i) % picked.len() as u64) as usize;
        let built = (0..picked.len())
            .map(|j| picked[(start + j) % picked.len()])
            .find_map(|rec| apply_recipe(&recipe, &rec.inputs(), scale).ok());
        match built {
            Some(mut s) => {
                s.id = Some(format!("mix-{i:06}"));
                *per_recipe.entry(recipe.name.clone()).or_default() += 1;
                samples.push(s);
            }
            None => *unrealizable.entry(recipe.name.clone()).or_default() += 1,
        }
    }

    let mut pseudo = 0;
    if echo.pseudo_dialogue {
        let context = ContextTemplate { ac_frames: echo.context_frames };
        for (i, rec) in picked.iter().enumerate() {
            if let Ok(mut s) = build_pseudo_dialogue(rec, &context) {
                s.id = Some(format!("pd-{i:06}"));
                samples.push(s);
                pseudo += 1;
            }
        }
    }

    let mut qa = 0;
    if echo.qa {
        let templates = QaTemplates::default();
        let mut synth = PlaceholderSynth;
        for (i, rec) in picked.iter().enumerate() {
            let frames = rec.ac_frames.unwrap_or_else(|| synth.frames(&rec.text));
            let labels = [("gender", &rec.attrs.gender), ("age", &rec.attrs.age), ("language", &rec.attrs.lang)];
            for (attr, value) in labels {
                let Some(value) = value else { continue };
                let triplet = build_qa_triplets(frames, attr, value, &templates, &mut synth).map_err(Failure::runtime)?;
                for mut s in triplet {
                    s.id = Some(format!("qa-{i:06}-{attr}-{}", s.recipe));
                    samples.push(s);
                    qa += 1;
                }
            }
        }
    }

    let summary = json!({
        "records": picked.len(),
        "mixture_samples": per_recipe,
        "unrealizable_draws": unrealizable,
        "pseudo_dialogues": pseudo,
        "qa_samples": qa,
        "total": samples.len(),
    });
    let meta = json!({ "config": echo, "summary": summary });
    write_atomic(out, |w| write_samples(w, &samples, Some(&meta))).map_err(Failure::usage)?;
    println!("{summary}");
    Ok(())
}
