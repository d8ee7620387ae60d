//! Linear warm-up followed by cosine decay to zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::FemError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub peak_lr: f64,
    pub warmup_steps: usize,
    pub total_steps: usize,
}

impl Schedule {
    pub fn new(peak_lr: f64, warmup_steps: usize, total_steps: usize) -> Result<Self, FemError> {
        if total_steps > 0 && warmup_steps >= total_steps {
            return Err(FemError::Config(format!(
                "warmup_steps ({warmup_steps}) must be below total_steps ({total_steps})"
            )));
        }
        Ok(Schedule {
            peak_lr,
            warmup_steps,
            total_steps,
        })
    }

    /// Learning rate at `step` in `0..=total_steps`.
    pub fn lr_at(&self, step: usize) -> Result<f64, FemError> {
        lr_at(step, self)
    }
}

/// `peak·step/warmup` during warm-up, then
/// `peak·½(1 + cos(π·(step − warmup)/(total − warmup)))`.
pub fn lr_at(step: usize, schedule: &Schedule) -> Result<f64, FemError> {
    let Schedule {
        peak_lr,
        warmup_steps,
        total_steps,
    } = *schedule;
    if step > total_steps {
        return Err(FemError::StepOutOfRange { step, total_steps });
    }
    if step < warmup_steps {
        return Ok(peak_lr * step as f64 / warmup_steps as f64);
    }
    let span = (total_steps - warmup_steps) as f64;
    if span == 0.0 {
        return Ok(peak_lr);
    }
    let progress = (step - warmup_steps) as f64 / span;
    Ok(peak_lr * 0.5 * (1.0 + (PI * progress).cos()))
}
