//! The `--config` file and generation overrides.

use std::path::Path;

use anyhow::{bail, Context};
use duplexkit_datagen::{StratKey, Task};
use duplexkit_reward::StubJudgeConfig;
use duplexkit_sim::SuiteConfig;
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub simulate: SimulateSection,
    pub eval: EvalSection,
    pub build_data: DataSection,
    pub score_reward: RewardSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub policy: Option<String>,
    pub timeout_ms: Option<u64>,
    pub features: Option<String>,
    /// Generation parameters, as accepted by `--generate`.
    pub generate: Option<toml::Table>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub window_min: Option<u64>,
    pub window_max: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub samples: Option<usize>,
    pub mixture: Option<String>,
    /// Replaces the preset task weights, in task order.
    pub weights: Option<Vec<f64>>,
    /// Replaces the preset task list entirely.
    pub tasks: Option<Vec<Task>>,
    pub phrase_ratio: Option<f64>,
    pub pseudo_dialogue: Option<bool>,
    pub qa: Option<bool>,
    pub budget: Option<usize>,
    pub priority: Option<Vec<StratKey>>,
    pub context_frames: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSection {
    pub judge: Option<String>,
    pub timeout_ms: Option<u64>,
    pub stub: Option<StubJudgeConfig>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn set_key(cfg: &mut Value, key: &str, value: Value) -> anyhow::Result<()> {
    if key == "seed" {
        bail!("the generation seed comes from --seed");
    }
    match cfg.get_mut(key) {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => bail!("unknown generate key {key:?}"),
    }
}

/// Reads `N` or `A-B` into the shape of the current value.
fn parse_value(current: &Value, key: &str, raw: &str) -> anyhow::Result<Value> {
    let raw = raw.trim();
    let int = |s: &str| {
        s.trim()
            .parse::<u64>()
            .with_context(|| format!("{key}: expected an integer, got {s:?}"))
    };
    Ok(match current {
        Value::Number(_) => int(raw)?.into(),
        Value::String(_) => raw.into(),
        Value::Object(obj) if obj.contains_key("min") && obj.contains_key("max") => {
            let (lo, hi) = raw.split_once('-').unwrap_or((raw, raw));
            serde_json::json!({ "min": int(lo)?, "max": int(hi)? })
        }
        _ => bail!("{key} cannot be set from the command line"),
    })
}

/// Defaults, then the config table, then `key=value` pairs from `spec`.
pub fn suite_config(file: Option<&toml::Table>, spec: Option<&str>, seed: u64) -> anyhow::Result<SuiteConfig> {
    let mut cfg = serde_json::to_value(SuiteConfig::default())?;
    for (k, v) in file.into_iter().flatten() {
        set_key(&mut cfg, k, serde_json::to_value(v)?)?;
    }
    for pair in spec.unwrap_or("").split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, raw) = pair
            .split_once('=')
            .with_context(|| format!("expected key=value, got {pair:?}"))?;
        let k = k.trim();
        let current = cfg.get(k).cloned().unwrap_or(Value::Null);
        let value = parse_value(&current, k, raw)?;
        set_key(&mut cfg, k, value)?;
    }
    cfg["seed"] = seed.into();
    let suite: SuiteConfig = serde_json::from_value(cfg).context("invalid generation config")?;
    suite.check()?;
    Ok(suite)
}
