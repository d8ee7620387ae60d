use serde::{Deserialize, Serialize};

use super::optim::OptimizerConfig;
use super::schedule::Schedule;
use super::FemError;
use crate::encoder::{ElementMask, TruncationPolicy};

/// Hyperparameters for one training run. `seed` has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemConfig {
    /// BiLSTM width per direction.
    #[serde(default = "defaults::hidden_size")]
    pub hidden_size: usize,
    #[serde(default = "defaults::dropout_rate")]
    pub dropout_rate: f64,
    #[serde(default = "defaults::peak_lr")]
    pub peak_lr: f64,
    #[serde(default = "defaults::epochs")]
    pub epochs: usize,
    /// Defaults to 10% of `total_steps`.
    #[serde(default)]
    pub warmup_steps: Option<usize>,
    /// Defaults to `epochs · ceil(train_len / batch_size)`.
    #[serde(default)]
    pub total_steps: Option<usize>,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    /// Weight of the L2 penalty on the classifier weights.
    #[serde(default = "defaults::l2_lambda")]
    pub l2_lambda: f64,
    pub seed: u64,
    #[serde(default)]
    pub element_mask: ElementMask,
    /// Only frozen encoders are supported; `true` is rejected by `validate`.
    #[serde(default)]
    pub encoder_finetune: bool,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub truncation: TruncationPolicy,
}

mod defaults {
    pub fn hidden_size() -> usize {
        256
    }
    pub fn dropout_rate() -> f64 {
        0.3
    }
    pub fn peak_lr() -> f64 {
        1e-5
    }
    pub fn epochs() -> usize {
        100
    }
    pub fn batch_size() -> usize {
        8
    }
    pub fn l2_lambda() -> f64 {
        1e-4
    }
}

impl FemConfig {
    pub fn new(seed: u64) -> Self {
        FemConfig {
            hidden_size: defaults::hidden_size(),
            dropout_rate: defaults::dropout_rate(),
            peak_lr: defaults::peak_lr(),
            epochs: defaults::epochs(),
            warmup_steps: None,
            total_steps: None,
            batch_size: defaults::batch_size(),
            l2_lambda: defaults::l2_lambda(),
            seed,
            element_mask: ElementMask::all(),
            encoder_finetune: false,
            optimizer: OptimizerConfig::default(),
            truncation: TruncationPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), FemError> {
        let bad = |m: String| Err(FemError::Config(m));
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout_rate {} is outside [0, 1)", self.dropout_rate));
        }
        if self.hidden_size == 0 || self.batch_size == 0 {
            return bad("hidden_size and batch_size must be positive".into());
        }
        if !(self.peak_lr.is_finite() && self.peak_lr >= 0.0) || self.l2_lambda.is_nan() || self.l2_lambda < 0.0 {
            return bad("peak_lr and l2_lambda must be non-negative".into());
        }
        if !self.element_mask.0.iter().any(|&on| on) {
            return bad("element_mask disables every segment".into());
        }
        if self.encoder_finetune {
            return bad("encoder fine-tuning is not supported; encoders are frozen".into());
        }
        if self.truncation.max_tokens == 0 {
            return bad("truncation.max_tokens must be positive".into());
        }
        if let (Some(w), Some(t)) = (self.warmup_steps, self.total_steps) {
            if t > 0 && w >= t {
                return bad(format!("warmup_steps ({w}) must be below total_steps ({t})"));
            }
        }
        Ok(())
    }

    pub fn steps_per_epoch(&self, train_len: usize) -> usize {
        train_len.div_ceil(self.batch_size)
    }

    /// Resolves the learning-rate schedule for a training set size.
    pub fn schedule(&self, train_len: usize) -> Result<Schedule, FemError> {
        let total = self
            .total_steps
            .unwrap_or(self.epochs * self.steps_per_epoch(train_len));
        let warmup = self.warmup_steps.unwrap_or(total / 10);
        Schedule::new(self.peak_lr, warmup, total)
    }
}
