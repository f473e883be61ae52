//! Classical step counter: band-pass, rectify, envelope, median-relative
//! threshold, peak picking with a physiological minimum inter-step distance.

use crate::audio_io::Waveform;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PeakPickEstimator {
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub envelope_smooth_ms: f64,
    pub peak_min_distance_s: f64,
    /// Threshold as a multiple of the median envelope value.
    pub threshold_k: f64,
}

impl Default for PeakPickEstimator {
    fn default() -> Self {
        PeakPickEstimator {
            band_lo_hz: 60.0,
            band_hi_hz: 2_000.0,
            envelope_smooth_ms: 30.0,
            peak_min_distance_s: 0.22,
            threshold_k: 3.0,
        }
    }
}

/// RBJ biquad, direct form 1.
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn lowpass(fc: f64, sr: f64, q: f64) -> Self {
        let w0 = 2.0 * std::f64::consts::PI * fc / sr;
        let alpha = w0.sin() / (2.0 * q);
        let cosw = w0.cos();
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 - cosw) / 2.0 / a0,
            b1: (1.0 - cosw) / a0,
            b2: (1.0 - cosw) / 2.0 / a0,
            a1: -2.0 * cosw / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    fn highpass(fc: f64, sr: f64, q: f64) -> Self {
        let w0 = 2.0 * std::f64::consts::PI * fc / sr;
        let alpha = w0.sin() / (2.0 * q);
        let cosw = w0.cos();
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 + cosw) / 2.0 / a0,
            b1: -(1.0 + cosw) / a0,
            b2: (1.0 + cosw) / 2.0 / a0,
            a1: -2.0 * cosw / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    fn process(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        let mut out = Vec::with_capacity(x.len());
        for &xi in x {
            let yi = self.b0 * xi + self.b1 * x1 + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
            x2 = x1;
            x1 = xi;
            y2 = y1;
            y1 = yi;
            out.push(yi);
        }
        out
    }
}

impl PeakPickEstimator {
    /// Like [`count`](Self::count), but zero-pads windows shorter than the
    /// 1 s minimum (silence adds no peaks). Step-aligned windows can end up
    /// arbitrarily short at the tail of a recording.
    pub fn count_padded(&self, w: &Waveform) -> Result<f64> {
        let min_len = w.sample_rate_hz as usize;
        if w.samples.len() >= min_len {
            return self.count(w);
        }
        let mut padded = w.clone();
        padded.samples.resize(min_len, 0.0);
        self.count(&padded)
    }

    /// Estimated step count in the window (always a nonnegative integer value
    /// returned as a real).
    pub fn count(&self, w: &Waveform) -> Result<f64> {
        if w.duration_s() < 1.0 {
            return Err(Error::InvalidInput(
                "peak picking needs a window of at least 1 s".into(),
            ));
        }
        let sr = w.sample_rate_hz as f64;
        if self.band_hi_hz >= sr / 2.0 || self.band_lo_hz >= self.band_hi_hz {
            return Err(Error::Config("band must lie within Nyquist".into()));
        }

        let x: Vec<f64> = w.samples.iter().map(|&s| s as f64).collect();
        let x = Biquad::highpass(self.band_lo_hz, sr, std::f64::consts::FRAC_1_SQRT_2).process(&x);
        let x = Biquad::lowpass(self.band_hi_hz, sr, std::f64::consts::FRAC_1_SQRT_2).process(&x);

        // full-wave rectification + moving-average envelope
        let rect: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let win = ((self.envelope_smooth_ms / 1000.0 * sr).round() as usize).max(1);
        let mut env = Vec::with_capacity(rect.len());
        let mut acc = 0.0f64;
        for i in 0..rect.len() {
            acc += rect[i];
            if i >= win {
                acc -= rect[i - win];
            }
            env.push(acc / win.min(i + 1) as f64);
        }

        let mut sorted = env.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let env_max = sorted[sorted.len() - 1];
        // the 1%-of-max floor rejects filter-tail residue on near-silent
        // input while staying gain-invariant
        let threshold = (self.threshold_k * median).max(0.01 * env_max);

        // candidate local maxima above threshold
        let mut candidates = Vec::new();
        for i in 1..env.len().saturating_sub(1) {
            if env[i] > threshold && env[i] >= env[i - 1] && env[i] > env[i + 1] {
                candidates.push(i);
            }
        }
        // greedy non-maximum suppression, strongest first
        candidates.sort_by(|&a, &b| env[b].total_cmp(&env[a]).then(a.cmp(&b)));
        let min_dist = (self.peak_min_distance_s * sr).round() as i64;
        let mut accepted: Vec<i64> = Vec::new();
        for &c in &candidates {
            let c = c as i64;
            if accepted.iter().all(|&a| (a - c).abs() >= min_dist) {
                accepted.push(c);
            }
        }
        Ok(accepted.len() as f64)
    }
}
