//! Adam with bias correction and a reduce-on-plateau learning-rate scheduler.

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step_count: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(lr: f64, param_shapes: &[Vec<usize>]) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step_count: 0,
            m: param_shapes
                .iter()
                .map(|s| vec![0.0; s.iter().product()])
                .collect(),
            v: param_shapes
                .iter()
                .map(|s| vec![0.0; s.iter().product()])
                .collect(),
        }
    }

    /// One bias-corrected update: p <- p - lr * m_hat / (sqrt(v_hat) + eps).
    pub fn step(&mut self, params: &mut [Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != params.len() {
            return Err(Error::Shape("adam: parameter/gradient count mismatch".into()));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if p.data.len() != g.data.len() || p.data.len() != m.len() {
                return Err(Error::Shape("adam: tensor shape mismatch".into()));
            }
            for i in 0..p.data.len() {
                let gi = g.data[i] as f64;
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * gi;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * gi * gi;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p.data[i] -= (self.lr * m_hat / (v_hat.sqrt() + self.eps)) as f32;
            }
        }
        Ok(())
    }
}

/// Multiplies the learning rate by `factor` after `patience` consecutive
/// epochs without improvement of the monitored metric.
#[derive(Debug, Clone)]
pub struct PlateauScheduler {
    pub lr: f64,
    pub patience: u32,
    pub factor: f64,
    pub min_lr: f64,
    /// Non-improving streaks longer than this abort training.
    pub divergence_patience: u32,
    best_metric: Option<f64>,
    epochs_since_improvement: u32,
    epochs_since_any_improvement: u32,
}

impl PlateauScheduler {
    pub fn new(initial_lr: f64) -> Self {
        PlateauScheduler {
            lr: initial_lr,
            patience: 5,
            factor: 0.9,
            min_lr: 1e-5,
            divergence_patience: 30,
            best_metric: None,
            epochs_since_improvement: 0,
            epochs_since_any_improvement: 0,
        }
    }

    /// Record one epoch's monitored metric (lower is better). Returns the
    /// learning rate to use next. Improvement = strict decrease by >= 1e-6.
    pub fn step(&mut self, metric: f64) -> f64 {
        let improved = match self.best_metric {
            None => true,
            Some(best) => metric <= best - 1e-6,
        };
        if improved {
            self.best_metric = Some(metric);
            self.epochs_since_improvement = 0;
            self.epochs_since_any_improvement = 0;
        } else {
            self.epochs_since_improvement += 1;
            self.epochs_since_any_improvement += 1;
            if self.epochs_since_improvement >= self.patience {
                self.lr = (self.lr * self.factor).max(self.min_lr);
                self.epochs_since_improvement = 0;
            }
        }
        self.lr
    }

    pub fn diverged(&self) -> bool {
        self.epochs_since_any_improvement >= self.divergence_patience
    }
}
