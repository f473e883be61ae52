//! Training-time augmentations on log-mel features: time/frequency masking,
//! per-band gain offsets, and mixup.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::dsp::MelSpectrogram;
use crate::error::{Error, Result};

/// Which augmentation to apply during training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AugmentSpec {
    None,
    SpecMask {
        n_masks: usize,
        time_mask_frames: usize,
        freq_mask_bins: usize,
    },
    FilterAug {
        n_bands: usize,
        gain_db_range: (f64, f64),
    },
    Mixup {
        alpha: f64,
    },
}

impl Default for AugmentSpec {
    fn default() -> Self {
        AugmentSpec::None
    }
}

impl AugmentSpec {
    pub fn default_spec_mask() -> Self {
        AugmentSpec::SpecMask {
            n_masks: 2,
            time_mask_frames: 50,
            freq_mask_bins: 8,
        }
    }

    pub fn default_filter_aug() -> Self {
        AugmentSpec::FilterAug {
            n_bands: 3,
            gain_db_range: (-6.0, 6.0),
        }
    }

    pub fn validate(&self, mel_bins: usize, frames: usize) -> Result<()> {
        match *self {
            AugmentSpec::None => Ok(()),
            AugmentSpec::SpecMask {
                time_mask_frames,
                freq_mask_bins,
                ..
            } => {
                if time_mask_frames >= frames || freq_mask_bins >= mel_bins {
                    return Err(Error::Config(
                        "mask sizes must be smaller than the feature dims".into(),
                    ));
                }
                Ok(())
            }
            AugmentSpec::FilterAug { n_bands, .. } => {
                if n_bands == 0 || n_bands > mel_bins {
                    return Err(Error::Config("n_bands must be in [1, mel_bins]".into()));
                }
                Ok(())
            }
            AugmentSpec::Mixup { alpha } => {
                if alpha <= 0.0 {
                    return Err(Error::Config("mixup alpha must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

/// SpecAugment-style masking: `n_masks` random time stripes and `n_masks`
/// frequency stripes filled with the tensor mean; time warping is omitted.
pub fn spec_mask(
    x: &MelSpectrogram,
    n_masks: usize,
    time_mask_frames: usize,
    freq_mask_bins: usize,
    rng: &mut impl Rng,
) -> MelSpectrogram {
    let mut out = x.clone();
    if n_masks == 0 {
        return out;
    }
    let fill = x.mean() as f32;
    let (f_dim, t_dim) = (x.mel_bins, x.frames);
    for _ in 0..n_masks {
        if time_mask_frames > 0 && t_dim > 1 {
            let width = rng.gen_range(1..=time_mask_frames.min(t_dim - 1));
            let start = rng.gen_range(0..=t_dim - width);
            for f in 0..f_dim {
                for t in start..start + width {
                    out.values[f * t_dim + t] = fill;
                }
            }
        }
        if freq_mask_bins > 0 && f_dim > 1 {
            let height = rng.gen_range(1..=freq_mask_bins.min(f_dim - 1));
            let start = rng.gen_range(0..=f_dim - height);
            for f in start..start + height {
                for t in 0..t_dim {
                    out.values[f * t_dim + t] = fill;
                }
            }
        }
    }
    out
}

/// Split the frequency axis into `n_bands` contiguous bands at random
/// boundaries and offset each band by a gain drawn from `gain_db_range`,
/// applied additively in the log domain. The time axis is untouched.
pub fn filter_aug(
    x: &MelSpectrogram,
    n_bands: usize,
    gain_db_range: (f64, f64),
    rng: &mut impl Rng,
) -> Result<MelSpectrogram> {
    if n_bands == 0 || n_bands > x.mel_bins {
        return Err(Error::Config("n_bands must be in [1, mel_bins]".into()));
    }
    let mut boundaries: Vec<usize> = (0..n_bands - 1)
        .map(|_| rng.gen_range(1..x.mel_bins))
        .collect();
    boundaries.sort_unstable();
    boundaries.insert(0, 0);
    boundaries.push(x.mel_bins);

    let mut out = x.clone();
    for band in boundaries.windows(2) {
        let gain = if gain_db_range.0 == gain_db_range.1 {
            gain_db_range.0
        } else {
            rng.gen_range(gain_db_range.0..=gain_db_range.1)
        } as f32;
        for f in band[0]..band[1] {
            for t in 0..x.frames {
                out.values[f * x.frames + t] += gain;
            }
        }
    }
    Ok(out)
}

/// Mixup with a fixed lambda: x = l*x1 + (1-l)*x2, same for labels.
pub fn mixup_with_lambda(
    x1: &MelSpectrogram,
    y1: f64,
    x2: &MelSpectrogram,
    y2: f64,
    lambda: f64,
) -> Result<(MelSpectrogram, f64)> {
    if x1.mel_bins != x2.mel_bins || x1.frames != x2.frames {
        return Err(Error::Shape("mixup inputs must have the same shape".into()));
    }
    let l = lambda as f32;
    let values = x1
        .values
        .iter()
        .zip(&x2.values)
        .map(|(&a, &b)| l * a + (1.0 - l) * b)
        .collect();
    Ok((
        MelSpectrogram {
            mel_bins: x1.mel_bins,
            frames: x1.frames,
            values,
            frame_hop_s: x1.frame_hop_s,
        },
        lambda * y1 + (1.0 - lambda) * y2,
    ))
}

/// Mixup with lambda ~ Beta(alpha, alpha).
pub fn mixup(
    x1: &MelSpectrogram,
    y1: f64,
    x2: &MelSpectrogram,
    y2: f64,
    alpha: f64,
    rng: &mut impl Rng,
) -> Result<(MelSpectrogram, f64)> {
    if alpha <= 0.0 {
        return Err(Error::Config("mixup alpha must be positive".into()));
    }
    let beta = Beta::new(alpha, alpha)
        .map_err(|e| Error::Config(format!("bad mixup alpha: {e}")))?;
    let lambda = beta.sample(rng);
    mixup_with_lambda(x1, y1, x2, y2, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mel(f: usize, t: usize, fill: impl Fn(usize, usize) -> f32) -> MelSpectrogram {
        let mut values = vec![0.0; f * t];
        for fi in 0..f {
            for ti in 0..t {
                values[fi * t + ti] = fill(fi, ti);
            }
        }
        MelSpectrogram {
            mel_bins: f,
            frames: t,
            values,
            frame_hop_s: 0.01,
        }
    }

    #[test]
    fn zero_masks_is_identity() {
        let x = mel(8, 20, |f, t| (f * t) as f32);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(spec_mask(&x, 0, 5, 2, &mut rng), x);
    }

    #[test]
    fn mask_on_constant_tensor_is_invisible() {
        let x = mel(8, 20, |_, _| 3.25);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = spec_mask(&x, 3, 10, 3, &mut rng);
        assert_eq!(y, x); // fill value is the mean, which equals the constant
    }

    #[test]
    fn masked_cell_count_is_bounded() {
        let x = mel(16, 40, |f, t| (f as f32).sin() + (t as f32).cos());
        let (n_masks, tm, fm) = (2usize, 6usize, 3usize);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = spec_mask(&x, n_masks, tm, fm, &mut rng);
        let changed = x
            .values
            .iter()
            .zip(&y.values)
            .filter(|(a, b)| a != b)
            .count();
        assert!(changed <= n_masks * (tm * 16 + fm * 40));
        assert!(changed > 0);
    }

    #[test]
    fn spec_mask_is_seeded_reproducible() {
        let x = mel(12, 30, |f, t| (f + 2 * t) as f32);
        let a = spec_mask(&x, 2, 8, 4, &mut ChaCha8Rng::seed_from_u64(9));
        let b = spec_mask(&x, 2, 8, 4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_gain_range_is_identity() {
        let x = mel(10, 25, |f, t| (f * 25 + t) as f32 * 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = filter_aug(&x, 3, (0.0, 0.0), &mut rng).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn single_band_shifts_everything_by_gain() {
        let x = mel(10, 25, |f, t| (f + t) as f32);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = filter_aug(&x, 1, (2.5, 2.5), &mut rng).unwrap();
        for (a, b) in x.values.iter().zip(&y.values) {
            assert!((b - a - 2.5).abs() < 1e-6);
        }
    }

    #[test]
    fn filter_aug_difference_is_piecewise_constant_along_freq() {
        let x = mel(32, 50, |f, t| ((f * 7 + t * 3) % 11) as f32 * 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let y = filter_aug(&x, 4, (-6.0, 6.0), &mut rng).unwrap();
        for f in 0..32 {
            let row_diffs: Vec<f32> = (0..50)
                .map(|t| y.values[f * 50 + t] - x.values[f * 50 + t])
                .collect();
            // constant within a row (time untouched)
            for d in &row_diffs {
                assert!((d - row_diffs[0]).abs() < 1e-5);
            }
        }
        // along frequency, at most 4 distinct offsets
        let offsets: Vec<f32> = (0..32).map(|f| y.values[f * 50] - x.values[f * 50]).collect();
        let mut distinct: Vec<f32> = Vec::new();
        for o in offsets {
            if !distinct.iter().any(|d| (d - o).abs() < 1e-5) {
                distinct.push(o);
            }
        }
        assert!(distinct.len() <= 4);
    }

    #[test]
    fn mixup_lambda_one_is_identity() {
        let x1 = mel(6, 10, |f, t| (f + t) as f32);
        let x2 = mel(6, 10, |f, t| (f * t) as f32);
        let (x, y) = mixup_with_lambda(&x1, 10.0, &x2, 20.0, 1.0).unwrap();
        assert_eq!(x, x1);
        assert_eq!(y, 10.0);
    }

    #[test]
    fn mixup_label_arithmetic() {
        let x1 = mel(2, 2, |_, _| 1.0);
        let x2 = mel(2, 2, |_, _| 2.0);
        let (_, y) = mixup_with_lambda(&x1, 10.0, &x2, 20.0, 0.3).unwrap();
        assert!((y - 17.0).abs() < 1e-12);
    }

    #[test]
    fn mixup_shape_mismatch_errors() {
        let x1 = mel(2, 2, |_, _| 1.0);
        let x2 = mel(3, 2, |_, _| 2.0);
        assert!(mixup_with_lambda(&x1, 1.0, &x2, 2.0, 0.5).is_err());
    }

    #[test]
    fn beta_lambda_mean_is_half() {
        // Beta(a, a) is symmetric around 0.5 for any a.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let beta = Beta::new(0.3, 0.3).unwrap();
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| beta.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() <= 0.01, "mean {mean}");
    }
}
