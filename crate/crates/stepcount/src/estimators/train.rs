//! Training loop for the convolutional regressor: shuffled mini-batches,
//! per-sample augmentation, Adam, plateau scheduling on validation MSE, and
//! best-validation checkpoint selection.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{filter_aug, mixup, spec_mask, AugmentSpec};
use crate::dsp::MelSpectrogram;
use crate::error::{Error, Result};
use crate::estimators::cnn::CnnRegressor;
use crate::nn::{AdamState, PlateauScheduler, Tensor};
use crate::windowing::{FoldSplit, WindowSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: u32,
    pub batch_size: usize,
    pub lr: f64,
    pub scheduler_patience: u32,
    pub scheduler_factor: f64,
    pub min_lr: f64,
    pub divergence_patience: u32,
    pub augment: AugmentSpec,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            lr: 1e-3,
            scheduler_patience: 5,
            scheduler_factor: 0.9,
            min_lr: 1e-5,
            divergence_patience: 30,
            augment: AugmentSpec::None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.lr <= 0.0 {
            return Err(Error::Config(
                "epochs, batch_size and lr must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: u32,
    pub train_mse: f64,
    pub val_mse: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Model restored to the best-validation parameters.
    pub model: CnnRegressor,
    pub history: Vec<EpochStats>,
    pub best_epoch: u32,
    pub best_val_mse: f64,
    pub diverged: bool,
}

fn pack_batch(features: &[MelSpectrogram], labels: &[f64]) -> Result<(Tensor, Vec<f32>)> {
    let (f, t) = (features[0].mel_bins, features[0].frames);
    let mut data = Vec::with_capacity(features.len() * f * t);
    for m in features {
        if m.mel_bins != f || m.frames != t {
            return Err(Error::Shape("inconsistent feature shapes in batch".into()));
        }
        data.extend_from_slice(&m.values);
    }
    Ok((
        Tensor::from_vec(&[features.len(), 1, f, t], data)?,
        labels.iter().map(|&l| l as f32).collect(),
    ))
}

fn apply_augment(
    features: &mut Vec<MelSpectrogram>,
    labels: &mut Vec<f64>,
    spec: &AugmentSpec,
    rng: &mut impl Rng,
) -> Result<()> {
    match *spec {
        AugmentSpec::None => {}
        AugmentSpec::SpecMask {
            n_masks,
            time_mask_frames,
            freq_mask_bins,
        } => {
            for m in features.iter_mut() {
                *m = spec_mask(m, n_masks, time_mask_frames, freq_mask_bins, rng);
            }
        }
        AugmentSpec::FilterAug {
            n_bands,
            gain_db_range,
        } => {
            for m in features.iter_mut() {
                *m = filter_aug(m, n_bands, gain_db_range, rng)?;
            }
        }
        AugmentSpec::Mixup { alpha } => {
            // pair each sample with a random permutation of batch indices
            let mut perm: Vec<usize> = (0..features.len()).collect();
            perm.shuffle(rng);
            let orig_feats = features.clone();
            let orig_labels = labels.clone();
            for i in 0..features.len() {
                let j = perm[i];
                let (x, y) = mixup(
                    &orig_feats[i],
                    orig_labels[i],
                    &orig_feats[j],
                    orig_labels[j],
                    alpha,
                    rng,
                )?;
                features[i] = x;
                labels[i] = y;
            }
        }
    }
    Ok(())
}

/// Batch MSE of a frozen model on a sample set.
pub fn evaluate_mse(model: &CnnRegressor, samples: &[&WindowSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate on empty set".into()));
    }
    let mut sq = 0.0f64;
    for s in samples {
        let pred = model.predict_one(&CnnRegressor::input_from_features(&s.features))?;
        sq += (pred - s.label_steps as f64).powi(2);
    }
    Ok(sq / samples.len() as f64)
}

/// Train on the fold's train partition, select on validation MSE.
pub fn train(
    samples: &[WindowSample],
    split: &FoldSplit,
    cfg: &TrainConfig,
    config_hash: &str,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let train_ids: BTreeSet<&str> = split.train.iter().map(String::as_str).collect();
    let val_ids: BTreeSet<&str> = split.validation.iter().map(String::as_str).collect();
    let train_set: Vec<&WindowSample> = samples
        .iter()
        .filter(|s| train_ids.contains(s.recording_id.as_str()))
        .collect();
    let val_set: Vec<&WindowSample> = samples
        .iter()
        .filter(|s| val_ids.contains(s.recording_id.as_str()))
        .collect();
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::InvalidInput(
            "train and validation partitions must be nonempty".into(),
        ));
    }
    if let Some(first) = train_set.first() {
        cfg.augment
            .validate(first.features.mel_bins, first.features.frames)?;
    }

    let mut model = CnnRegressor::new(cfg.seed, config_hash);
    // start the output head at the train-set mean so early epochs refine
    // deviations instead of crawling toward the label offset
    let mean_label = train_set.iter().map(|s| s.label_steps as f64).sum::<f64>()
        / train_set.len() as f64;
    let fc2_bias = model.params.last_mut().expect("model has parameters");
    fc2_bias.data[0] = mean_label as f32;
    let mut adam = AdamState::new(cfg.lr, &model.param_shapes());
    let mut sched = PlateauScheduler::new(cfg.lr);
    sched.patience = cfg.scheduler_patience;
    sched.factor = cfg.scheduler_factor;
    sched.min_lr = cfg.min_lr;
    sched.divergence_patience = cfg.divergence_patience;

    let mut history = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0u32;
    let mut best_params = model.params.clone();
    let mut diverged = false;

    for epoch in 1..=cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(
            cfg.seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0f64;
        let mut n_seen = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut feats: Vec<MelSpectrogram> =
                batch.iter().map(|&i| train_set[i].features.clone()).collect();
            let mut labels: Vec<f64> =
                batch.iter().map(|&i| train_set[i].label_steps as f64).collect();
            apply_augment(&mut feats, &mut labels, &cfg.augment, &mut rng)?;
            let (x, targets) = pack_batch(&feats, &labels)?;
            let (loss, grads) = model.forward_backward(&x, &targets)?;
            adam.lr = sched.lr;
            adam.step(&mut model.params, &grads)?;
            loss_sum += loss * batch.len() as f64;
            n_seen += batch.len();
        }
        let train_mse = loss_sum / n_seen as f64;
        let val_mse = evaluate_mse(&model, &val_set)?;
        let lr = sched.step(val_mse);
        history.push(EpochStats {
            epoch,
            train_mse,
            val_mse,
            lr,
        });
        if val_mse < best_val - 1e-6 {
            best_val = val_mse;
            best_epoch = epoch;
            best_params = model.params.clone();
        }
        if sched.diverged() {
            diverged = true;
            break;
        }
    }

    model.params = best_params;
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
        best_val_mse: best_val,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::windowing::Window;

    fn toy_sample(seed: u64, label: u32, rec: &str) -> WindowSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // a crude "cadence texture": more label steps -> more energy columns
        let (f, t) = (64usize, 50usize);
        let mut values = vec![0.0f32; f * t];
        for col in 0..t {
            let active = (col * label as usize) % t < label as usize * 2;
            for row in 0..f {
                values[row * t + col] =
                    if active { 1.0 } else { -0.5 } + rng.gen_range(-0.1f32..0.1);
            }
        }
        WindowSample {
            window: Window {
                start_s: 0.0,
                end_s: 0.5,
            },
            label_steps: label,
            features: MelSpectrogram {
                mel_bins: f,
                frames: t,
                values,
                frame_hop_s: 0.01,
            },
            recording_id: rec.into(),
            runner_id: rec.into(),
            oracle_dependent: false,
        }
    }

    fn toy_dataset() -> (Vec<WindowSample>, FoldSplit) {
        let mut samples = Vec::new();
        for i in 0..12u64 {
            let label = 10 + (i % 4) as u32;
            samples.push(toy_sample(i, label, &format!("rec{}", i % 6)));
        }
        let split = FoldSplit {
            fold_id: "s0".into(),
            train: (0..4).map(|i| format!("rec{i}")).collect(),
            validation: vec!["rec4".into()],
            test: vec!["rec5".into()],
        };
        (samples, split)
    }

    #[test]
    fn training_is_seed_deterministic() {
        let (samples, split) = toy_dataset();
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 4,
            seed: 5,
            ..TrainConfig::default()
        };
        let a = train(&samples, &split, &cfg, "h").unwrap();
        let b = train(&samples, &split, &cfg, "h").unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.model.params, b.model.params);
    }

    #[test]
    fn best_checkpoint_tracks_validation() {
        let (samples, split) = toy_dataset();
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let out = train(&samples, &split, &cfg, "h").unwrap();
        let final_val = out.history.last().unwrap().val_mse;
        assert!(out.best_val_mse <= final_val + 1e-12);
        assert!(out.best_epoch >= 1);
    }

    #[test]
    fn one_batch_overfit() {
        // 32 samples, 200 optimizer steps on the same batch: MSE < 0.1.
        let samples: Vec<WindowSample> = (0..32u64)
            .map(|i| toy_sample(i, 10 + (i % 4) as u32, "rec0"))
            .collect();
        let mut model = CnnRegressor::new(1, "h");
        let mut adam = AdamState::new(1e-3, &model.param_shapes());
        let feats: Vec<MelSpectrogram> = samples.iter().map(|s| s.features.clone()).collect();
        let labels: Vec<f64> = samples.iter().map(|s| s.label_steps as f64).collect();
        let (x, targets) = pack_batch(&feats, &labels).unwrap();
        let mut last = f64::INFINITY;
        for _ in 0..200 {
            let (loss, grads) = model.forward_backward(&x, &targets).unwrap();
            adam.step(&mut model.params, &grads).unwrap();
            last = loss;
        }
        assert!(last < 0.1, "train MSE after 200 steps: {last}");
    }

    #[test]
    fn empty_partition_is_an_error() {
        let (samples, mut split) = toy_dataset();
        split.validation.clear();
        let cfg = TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        };
        assert!(train(&samples, &split, &cfg, "h").is_err());
    }

    #[test]
    fn augmented_training_runs() {
        let (samples, split) = toy_dataset();
        for augment in [
            // toy features are only 50 frames wide, so masks stay small
            AugmentSpec::SpecMask {
                n_masks: 2,
                time_mask_frames: 10,
                freq_mask_bins: 8,
            },
            AugmentSpec::default_filter_aug(),
            AugmentSpec::Mixup { alpha: 0.3 },
        ] {
            let cfg = TrainConfig {
                epochs: 2,
                batch_size: 4,
                augment,
                ..TrainConfig::default()
            };
            let out = train(&samples, &split, &cfg, "h").unwrap();
            assert_eq!(out.history.len(), 2);
        }
    }
}
