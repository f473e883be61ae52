//! Convolutional step-count regressor: four 3x3 conv + ReLU + 2x2 average
//! pool blocks (16, 32, 64, 128 channels), global mean+max pooling, and a
//! 256 -> 64 -> 1 linear head. Input is a single-channel log-mel window.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsp::MelSpectrogram;
use crate::error::{Error, Result};
use crate::nn::ops::{
    avg_pool2d_backward, avg_pool2d_forward, conv2d_backward, conv2d_forward,
    global_mean_max_pool_backward, global_mean_max_pool_forward, linear_backward, linear_forward,
    relu_backward, relu_forward,
};
use crate::nn::Tensor;

pub const ARCH_ID: &str = "cnn4-16-32-64-128";

const CHANNELS: [usize; 5] = [1, 16, 32, 64, 128];

/// Parameter order: (conv_w, conv_b) per block, then fc1_w, fc1_b, fc2_w, fc2_b.
#[derive(Debug, Clone)]
pub struct CnnRegressor {
    pub params: Vec<Tensor>,
    pub config_hash: String,
}

impl CnnRegressor {
    pub fn new(seed: u64, config_hash: &str) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::new();
        for b in 0..4 {
            let (ci, co) = (CHANNELS[b], CHANNELS[b + 1]);
            params.push(Tensor::kaiming_uniform(&[co, ci, 3, 3], ci * 9, &mut rng));
            params.push(Tensor::zeros(&[co]));
        }
        params.push(Tensor::kaiming_uniform(&[64, 256], 256, &mut rng));
        params.push(Tensor::zeros(&[64]));
        params.push(Tensor::kaiming_uniform(&[1, 64], 64, &mut rng));
        params.push(Tensor::zeros(&[1]));
        CnnRegressor {
            params,
            config_hash: config_hash.to_string(),
        }
    }

    pub fn from_params(params: Vec<Tensor>, config_hash: &str) -> Result<Self> {
        let template = CnnRegressor::new(0, config_hash);
        if params.len() != template.params.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} parameter tensors, got {}",
                template.params.len(),
                params.len()
            )));
        }
        for (p, t) in params.iter().zip(&template.params) {
            if p.shape != t.shape {
                return Err(Error::Checkpoint(format!(
                    "parameter shape {:?} does not match architecture {:?}",
                    p.shape, t.shape
                )));
            }
        }
        Ok(CnnRegressor {
            params,
            config_hash: config_hash.to_string(),
        })
    }

    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        self.params.iter().map(|p| p.shape.clone()).collect()
    }

    /// Pack one feature matrix as a [1, 1, F, T] input tensor.
    pub fn input_from_features(mel: &MelSpectrogram) -> Tensor {
        Tensor {
            shape: vec![1, 1, mel.mel_bins, mel.frames],
            data: mel.values.clone(),
        }
    }

    /// Forward pass for one sample, returning the scalar prediction.
    pub fn predict_one(&self, x: &Tensor) -> Result<f64> {
        let (out, _) = self.forward_cached(x)?;
        Ok(out.data[0] as f64)
    }

    /// Predictions for a slice of feature matrices.
    pub fn predict(&self, features: &[&MelSpectrogram]) -> Result<Vec<f64>> {
        features
            .iter()
            .map(|m| self.predict_one(&Self::input_from_features(m)))
            .collect()
    }

    fn forward_cached(&self, x: &Tensor) -> Result<(Tensor, ForwardCache)> {
        if x.shape.len() != 4 || x.shape[1] != 1 {
            return Err(Error::Shape(format!(
                "expected input [N, 1, F, T], got {:?}",
                x.shape
            )));
        }
        let mut cache = ForwardCache::default();
        let mut cur = x.clone();
        for b in 0..4 {
            let w = &self.params[2 * b];
            let bias = &self.params[2 * b + 1];
            cache.block_inputs.push(cur.clone());
            let a = conv2d_forward(&cur, w, Some(bias), 1, 1)?;
            let r = relu_forward(&a);
            let p = avg_pool2d_forward(&r, 2)?;
            cache.conv_outputs.push(a);
            cache.relu_outputs.push(r);
            cur = p;
        }
        cache.pool_output = cur.clone();
        let g = global_mean_max_pool_forward(&cur)?;
        cache.global_pooled = g.clone();
        let h = linear_forward(&g, &self.params[8], &self.params[9])?;
        cache.head_pre_relu = h.clone();
        let hr = relu_forward(&h);
        cache.head_relu = hr.clone();
        let out = linear_forward(&hr, &self.params[10], &self.params[11])?;
        Ok((out, cache))
    }

    /// Forward plus backward for a batch packed as [N, 1, F, T]; returns the
    /// batch MSE and gradients in parameter order.
    pub fn forward_backward(&self, x: &Tensor, targets: &[f32]) -> Result<(f64, Vec<Tensor>)> {
        let n = x.shape[0];
        if targets.len() != n {
            return Err(Error::Shape("target count != batch size".into()));
        }
        let (out, cache) = self.forward_cached(x)?;
        let target = Tensor::from_vec(&[n, 1], targets.to_vec())?;
        let loss = crate::nn::ops::mse_loss(&out, &target)?;
        let dout = crate::nn::ops::mse_grad(&out, &target)?;

        let mut grads: Vec<Tensor> = self.params.iter().map(|p| Tensor::zeros(&p.shape)).collect();

        let (dhr, dw2, db2) = linear_backward(&cache.head_relu, &self.params[10], &dout)?;
        grads[10] = dw2;
        grads[11] = db2;
        let dh = relu_backward(&cache.head_pre_relu, &dhr)?;
        let (dg, dw1, db1) = linear_backward(&cache.global_pooled, &self.params[8], &dh)?;
        grads[8] = dw1;
        grads[9] = db1;
        let mut dcur = global_mean_max_pool_backward(&cache.pool_output, &dg)?;
        for b in (0..4).rev() {
            let dr = avg_pool2d_backward(&cache.relu_outputs[b], 2, &dcur)?;
            let da = relu_backward(&cache.conv_outputs[b], &dr)?;
            let (dx, dk, db) =
                conv2d_backward(&cache.block_inputs[b], &self.params[2 * b], 1, 1, &da)?;
            grads[2 * b] = dk;
            grads[2 * b + 1] = db;
            dcur = dx;
        }
        Ok((loss, grads))
    }
}

#[derive(Default)]
struct ForwardCache {
    block_inputs: Vec<Tensor>,
    conv_outputs: Vec<Tensor>,
    relu_outputs: Vec<Tensor>,
    pool_output: Tensor,
    global_pooled: Tensor,
    head_pre_relu: Tensor,
    head_relu: Tensor,
}
