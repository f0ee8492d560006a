use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimizer, schedule and model-shape settings for one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Decision threshold on every head.
    pub threshold: f64,
    /// Output widths of the R-GCN layers, first to last.
    pub layer_widths: Vec<usize>,
    /// Carried through to checkpoints for reproducibility; not used by the model.
    pub tokenizer_scheme: String,
    pub tokenizer_vocab_size: usize,
    pub tokenizer_prune_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            epochs: 40,
            batch_size: 8,
            seed: 42,
            threshold: 0.5,
            layer_widths: vec![256],
            tokenizer_scheme: "unigram".into(),
            tokenizer_vocab_size: 20000,
            tokenizer_prune_fraction: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if !(self.adam_eps.is_finite() && self.adam_eps > 0.0) {
            return bad(format!("adam_eps must be positive, got {}", self.adam_eps));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold must lie in (0, 1), got {}", self.threshold));
        }
        if self.layer_widths.is_empty() || self.layer_widths.contains(&0) {
            return bad(format!("layer_widths must be non-empty and positive, got {:?}", self.layer_widths));
        }
        if !(self.tokenizer_prune_fraction > 0.0 && self.tokenizer_prune_fraction < 1.0) {
            return bad(format!(
                "tokenizer_prune_fraction must lie in (0, 1), got {}",
                self.tokenizer_prune_fraction
            ));
        }
        Ok(())
    }
}
