//! Task recipes and seeded mixture sampling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DatagenError;
use crate::pattern::Pattern;

const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecipe {
    pub name: String,
    pub pattern: Pattern,
    pub mix_weight: f64,
}

impl TaskRecipe {
    pub fn new(name: &str, formula: &str, mix_weight: f64) -> Result<Self, DatagenError> {
        Ok(Self {
            name: name.to_string(),
            pattern: Pattern::known(formula)?,
            mix_weight,
        })
    }
}

/// A task with one mixture weight and one or more formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub name: String,
    pub weight: f64,
    pub formulas: Vec<Pattern>,
    /// Relative split across `formulas`; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula_weights: Option<Vec<f64>>,
    /// Trained-token volume in billions, kept as metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens_b: Option<f64>,
}

impl Task {
    fn new(name: &str, weight: f64, formulas: &[&str], tokens_b: Option<f64>) -> Self {
        Self {
            name: name.into(),
            weight,
            formulas: formulas.iter().map(|f| Pattern::known(f).expect("table formula")).collect(),
            formula_weights: None,
            tokens_b,
        }
    }

    /// One recipe per formula, carrying its share of the task weight.
    pub fn recipes(&self) -> Result<Vec<TaskRecipe>, DatagenError> {
        let n = self.formulas.len();
        let split = match &self.formula_weights {
            None => vec![1.0 / n as f64; n],
            Some(w) if w.len() == n && w.iter().all(|x| x.is_finite() && *x >= 0.0) => {
                let total: f64 = w.iter().sum();
                if total <= 0.0 {
                    return Err(DatagenError::BadWeights { sum: total });
                }
                w.iter().map(|x| x / total).collect()
            }
            Some(w) => return Err(DatagenError::BadWeights { sum: w.iter().sum() }),
        };
        self.formulas
            .iter()
            .zip(split)
            .map(|(p, share)| {
                if !p.is_known() {
                    return Err(DatagenError::UnknownFormula(p.to_string()));
                }
                Ok(TaskRecipe {
                    name: self.name.clone(),
                    pattern: p.clone(),
                    mix_weight: self.weight * share,
                })
            })
            .collect()
    }
}

/// Post-training task ratios.
pub fn post_training_tasks() -> Vec<Task> {
    vec![
        Task::new("General Intelligence", 0.4, &["t→t", "t→a_d", "a_c→t", "a_c→t|a_d"], None),
        Task::new("Spoken Dialogue", 0.3, &["a_c→t|a_d"], None),
        Task::new("Speech Understanding", 0.1, &["a_c→t", "a_c|t→t", "a_c|a_c→t", "a_c|a_c→t|a_d"], None),
        Task::new("Speech Generation", 0.1, &["t→a_d"], None),
        Task::new("Audio Understanding", 0.1, &["t|a_c→t"], None),
    ]
}

/// Second pre-training stage, weighted by trained-token volume.
pub fn pretraining_stage2_tasks() -> Vec<Task> {
    let rows: [(&str, f64, &[&str]); 7] = [
        ("ASR", 80.0, &["a_c→t"]),
        ("TTS", 160.0, &["t→a_d"]),
        ("Audio-only", 240.0, &["a_c→a_d", "a_d→a_d"]),
        ("Speech Continuation", 160.0, &["a_c→t"]),
        ("Speech-Text Interleave", 540.0, &["a_c→t|a_d", "a_c→t→a_c", "a_d→t→a_d", "a_c→t→a_d"]),
        ("Text-only", 800.0, &["t→t"]),
        ("Full-Duplex", 5.0, &["a_c→t|a_d"]),
    ];
    let total: f64 = rows.iter().map(|r| r.1).sum();
    rows.iter()
        .map(|(name, tokens, formulas)| Task::new(name, tokens / total, formulas, Some(*tokens)))
        .collect()
}

/// I.i.d. recipe draws by `mix_weight`.
#[derive(Debug, Clone)]
pub struct MixtureSampler {
    recipes: Vec<TaskRecipe>,
    dist: WeightedIndex<f64>,
    rng: ChaCha8Rng,
}

impl MixtureSampler {
    pub fn new(recipes: Vec<TaskRecipe>, seed: u64) -> Result<Self, DatagenError> {
        let sum: f64 = recipes.iter().map(|r| r.mix_weight).sum();
        let sane = recipes.iter().all(|r| r.mix_weight.is_finite() && r.mix_weight >= 0.0);
        if recipes.is_empty() || !sane || (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(DatagenError::BadWeights { sum });
        }
        let dist = WeightedIndex::new(recipes.iter().map(|r| r.mix_weight))
            .map_err(|_| DatagenError::BadWeights { sum })?;
        Ok(Self {
            recipes,
            dist,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn from_tasks(tasks: &[Task], seed: u64) -> Result<Self, DatagenError> {
        let mut recipes = Vec::new();
        for t in tasks {
            recipes.extend(t.recipes()?);
        }
        Self::new(recipes, seed)
    }

    pub fn recipes(&self) -> &[TaskRecipe] {
        &self.recipes
    }

    pub fn draw_index(&mut self) -> usize {
        self.dist.sample(&mut self.rng)
    }

    pub fn draw(&mut self) -> &TaskRecipe {
        let i = self.draw_index();
        &self.recipes[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_sum_to_one() {
        for tasks in [post_training_tasks(), pretraining_stage2_tasks()] {
            let recipes: Vec<_> = tasks.iter().flat_map(|t| t.recipes().unwrap()).collect();
            let sum: f64 = recipes.iter().map(|r| r.mix_weight).sum();
            assert!((sum - 1.0).abs() < 1e-12);
            MixtureSampler::new(recipes, 0).unwrap();
        }
        let pre = pretraining_stage2_tasks();
        assert_eq!(pre[5].weight, 800.0 / 1985.0);
    }

    #[test]
    fn single_recipe_always_drawn() {
        let r = TaskRecipe::new("ASR", "a_c→t", 1.0).unwrap();
        let mut m = MixtureSampler::new(vec![r], 5).unwrap();
        assert!((0..100).all(|_| m.draw_index() == 0));
    }

    #[test]
    fn bad_weights() {
        let a = TaskRecipe::new("a", "a_c→t", 0.5).unwrap();
        let b = TaskRecipe::new("b", "t→a_d", 0.4).unwrap();
        assert!(matches!(MixtureSampler::new(vec![a.clone(), b], 0), Err(DatagenError::BadWeights { .. })));
        let neg = TaskRecipe { mix_weight: -0.5, ..a.clone() };
        let big = TaskRecipe { mix_weight: 1.5, ..a };
        assert!(MixtureSampler::new(vec![neg, big], 0).is_err());
        assert!(MixtureSampler::new(vec![], 0).is_err());
    }

    #[test]
    fn formula_split() {
        let mut t = post_training_tasks().remove(0);
        t.formula_weights = Some(vec![3.0, 1.0, 0.0, 0.0]);
        let r = t.recipes().unwrap();
        assert!((r[0].mix_weight - 0.3).abs() < 1e-12);
        assert!((r[1].mix_weight - 0.1).abs() < 1e-12);
        t.formula_weights = Some(vec![1.0]);
        assert!(t.recipes().is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let mut a = MixtureSampler::from_tasks(&post_training_tasks(), 42).unwrap();
        let mut b = MixtureSampler::from_tasks(&post_training_tasks(), 42).unwrap();
        let xs: Vec<_> = (0..500).map(|_| a.draw_index()).collect();
        let ys: Vec<_> = (0..500).map(|_| b.draw_index()).collect();
        assert_eq!(xs, ys);
    }
}
