use serde::{Deserialize, Serialize};

use super::network::FemParams;

/// Adaptive-moment optimizer settings. The L2 penalty lives in the loss, so
/// there is no decoupled weight decay here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

pub(crate) struct Adam {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: FemParams,
    v: FemParams,
    t: i32,
}

impl Adam {
    pub fn new(config: OptimizerConfig, params: &FemParams) -> Self {
        let OptimizerConfig::Adam { beta1, beta2, epsilon } = config;
        Adam {
            beta1,
            beta2,
            epsilon,
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut FemParams, grads: &FemParams, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            for k in 0..p.len() {
                m[k] = b1 * m[k] + (1.0 - b1) * g[k];
                v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
                p[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
            }
        }
    }
}
