//! Run configuration: one JSON file drives training, indexing, and
//! evaluation. The `DIALOGFORGE_SEED` environment variable overrides the
//! configured seed everywhere.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use dialogforge_core::belief::BeliefMode;
use dialogforge_core::seq2seq::{ModelConfig, TrainConfig};

pub const SEED_ENV_VAR: &str = "DIALOGFORGE_SEED";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathsSection {
    pub corpus: PathBuf,
    pub checkpoint: PathBuf,
    #[serde(default)]
    pub store: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub max_decode_len: usize,
    pub use_context: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        let d = ModelConfig::default();
        Self {
            embed_dim: d.embed_dim,
            hidden_dim: d.hidden_dim,
            max_decode_len: d.max_decode_len,
            use_context: d.use_context,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gradient_clip_norm: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            epochs: d.epochs,
            batch_size: d.batch_size,
            learning_rate: d.learning_rate,
            gradient_clip_norm: d.gradient_clip_norm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefModeName {
    EncoderFinal,
    DecoderFinal,
    Concat,
}

impl From<BeliefModeName> for BeliefMode {
    fn from(name: BeliefModeName) -> Self {
        match name {
            BeliefModeName::EncoderFinal => BeliefMode::EncoderFinal,
            BeliefModeName::DecoderFinal => BeliefMode::DecoderFinal,
            BeliefModeName::Concat => BeliefMode::Concat,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub paths: PathsSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default = "default_belief_mode")]
    pub belief_mode: BeliefModeName,
    #[serde(default = "default_min_count")]
    pub vocab_min_count: u64,
}

fn default_belief_mode() -> BeliefModeName {
    BeliefModeName::DecoderFinal
}

fn default_min_count() -> u64 {
    1
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(seed) = seed_from_env()? {
            config.seed = seed;
        }
        Ok(config)
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            embed_dim: self.model.embed_dim,
            hidden_dim: self.model.hidden_dim,
            max_decode_len: self.model.max_decode_len,
            use_context: self.model.use_context,
        }
    }

    /// The run seed drives the corpus split, parameter init, and the batch
    /// shuffle.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            learning_rate: self.train.learning_rate,
            gradient_clip_norm: self.train.gradient_clip_norm,
            seed: self.seed,
        }
    }
}

/// Reads the seed override; set but unparsable values are hard errors so a
/// typo does not silently change an experiment.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(value) => {
            let seed = value
                .parse::<u64>()
                .with_context(|| format!("{SEED_ENV_VAR}={value} is not a valid seed"))?;
            Ok(Some(seed))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("reading seed environment variable"),
    }
}
