//! Log-Mel spectrogram extraction.
//!
//! STFT with a periodic Hann window, HTK-style mel filterbank, log compression
//! with a floor, and optional per-window standardization. The canonical config
//! turns a 5 s window at 16 kHz into a 64x500 matrix.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use sha2::{Digest, Sha256};

use crate::audio_io::Waveform;
use crate::error::{Error, Result};

/// STFT / mel extraction parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureConfig {
    pub sample_rate_hz: u32,
    pub fft_size: usize,
    pub win_length: usize,
    pub hop_length: usize,
    pub mel_bins: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub log_floor: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self::canonical()
    }
}

impl FeatureConfig {
    /// 16 kHz, 512-point FFT, 25 ms window, 10 ms hop, 64 mel bins, 50-8000 Hz.
    pub fn canonical() -> Self {
        FeatureConfig {
            sample_rate_hz: 16_000,
            fft_size: 512,
            win_length: 400,
            hop_length: 160,
            mel_bins: 64,
            fmin_hz: 50.0,
            fmax_hz: 8_000.0,
            log_floor: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hop_length == 0 || self.hop_length > self.win_length {
            return Err(Error::Config("require 0 < hop_length <= win_length".into()));
        }
        if self.win_length > self.fft_size {
            return Err(Error::Config("require win_length <= fft_size".into()));
        }
        if !(self.fmin_hz >= 0.0
            && self.fmin_hz < self.fmax_hz
            && self.fmax_hz <= self.sample_rate_hz as f64 / 2.0)
        {
            return Err(Error::Config(
                "require 0 <= fmin < fmax <= sample_rate/2".into(),
            ));
        }
        if self.mel_bins == 0 {
            return Err(Error::Config("mel_bins must be >= 1".into()));
        }
        if self.log_floor <= 0.0 {
            return Err(Error::Config("log_floor must be positive".into()));
        }
        Ok(())
    }

    /// Short hex digest over the serialized config; stamps caches and
    /// checkpoints so mismatched feature geometry is detected.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex_prefix(&digest, 16)
    }
}

pub(crate) fn hex_prefix(bytes: &[u8], chars: usize) -> String {
    let mut s = String::with_capacity(chars);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
        if s.len() >= chars {
            break;
        }
    }
    s.truncate(chars);
    s
}

/// Log-mel feature matrix, F mel bins by T frames, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub mel_bins: usize,
    pub frames: usize,
    /// Row-major F x T log-energies.
    pub values: Vec<f32>,
    pub frame_hop_s: f64,
}

impl MelSpectrogram {
    pub fn get(&self, f: usize, t: usize) -> f32 {
        self.values[f * self.frames + t]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum::<f64>() / self.values.len() as f64
    }

    /// Per-window standardization: subtract mean, divide by std (eps guard).
    pub fn standardized(&self) -> MelSpectrogram {
        let n = self.values.len() as f64;
        let mean = self.mean();
        let var = self
            .values
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        let denom = var.sqrt() + 1e-6;
        MelSpectrogram {
            mel_bins: self.mel_bins,
            frames: self.frames,
            values: self
                .values
                .iter()
                .map(|&v| ((v as f64 - mean) / denom) as f32)
                .collect(),
            frame_hop_s: self.frame_hop_s,
        }
    }
}

fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Power spectrogram: (fft_size/2 + 1) x T, row-major over frequency bins.
///
/// Frame t covers samples [t*hop, t*hop + win_length) under a periodic Hann
/// window; T = floor((len - win_length)/hop) + 1.
pub fn stft_power(w: &Waveform, cfg: &FeatureConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    if w.samples.len() < cfg.win_length {
        return Err(Error::InvalidInput(format!(
            "waveform of {} samples is shorter than win_length {}",
            w.samples.len(),
            cfg.win_length
        )));
    }
    let n_frames = (w.samples.len() - cfg.win_length) / cfg.hop_length + 1;
    let n_bins = cfg.fft_size / 2 + 1;
    let window = hann_periodic(cfg.win_length);

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(cfg.fft_size);
    let mut out = vec![vec![0.0f64; n_frames]; n_bins];
    let mut buf = vec![Complex::new(0.0, 0.0); cfg.fft_size];
    for t in 0..n_frames {
        let start = t * cfg.hop_length;
        for i in 0..cfg.fft_size {
            buf[i] = if i < cfg.win_length {
                Complex::new(w.samples[start + i] as f64 * window[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        for (k, row) in out.iter_mut().enumerate() {
            row[t] = buf[k].norm_sqr();
        }
    }
    Ok(out)
}

/// Hz to mel, HTK formula.
pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

/// Mel to Hz, HTK formula.
pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Center frequencies (Hz) of the mel filters for `cfg`.
pub fn mel_center_frequencies(cfg: &FeatureConfig) -> Vec<f64> {
    let lo = hz_to_mel(cfg.fmin_hz);
    let hi = hz_to_mel(cfg.fmax_hz);
    (1..=cfg.mel_bins)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (cfg.mel_bins + 1) as f64))
        .collect()
}

/// Triangular mel filterbank, mel_bins x (fft_size/2 + 1), row-major.
pub fn mel_filterbank(cfg: &FeatureConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let n_bins = cfg.fft_size / 2 + 1;
    let lo = hz_to_mel(cfg.fmin_hz);
    let hi = hz_to_mel(cfg.fmax_hz);
    let edges: Vec<f64> = (0..cfg.mel_bins + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (cfg.mel_bins + 1) as f64))
        .collect();
    let bin_hz = cfg.sample_rate_hz as f64 / cfg.fft_size as f64;

    let mut fb = vec![vec![0.0f64; n_bins]; cfg.mel_bins];
    for m in 0..cfg.mel_bins {
        let (f_lo, f_c, f_hi) = (edges[m], edges[m + 1], edges[m + 2]);
        let mut any = false;
        for k in 0..n_bins {
            let f = k as f64 * bin_hz;
            let up = (f - f_lo) / (f_c - f_lo);
            let down = (f_hi - f) / (f_hi - f_c);
            let wgt = up.min(down).max(0.0);
            if wgt > 0.0 {
                any = true;
            }
            fb[m][k] = wgt;
        }
        if !any {
            return Err(Error::Config(format!(
                "mel filter {m} is empty: mel_bins too large for fft resolution"
            )));
        }
    }
    Ok(fb)
}

/// Number of frames the shape contract demands for a signal of `len` samples.
fn target_frames(len: usize, cfg: &FeatureConfig) -> usize {
    ((len as f64 / cfg.hop_length as f64).round() as usize).max(1)
}

/// Log-mel spectrogram. The signal is right-padded with zeros so a w-second
/// window at the canonical config yields exactly w*100 frames.
pub fn log_mel(w: &Waveform, cfg: &FeatureConfig) -> Result<MelSpectrogram> {
    cfg.validate()?;
    if w.samples.len() < cfg.win_length {
        return Err(Error::InvalidInput(format!(
            "waveform of {} samples is shorter than win_length {}",
            w.samples.len(),
            cfg.win_length
        )));
    }
    let frames = target_frames(w.samples.len(), cfg);
    let needed = (frames - 1) * cfg.hop_length + cfg.win_length;
    let padded = if w.samples.len() < needed {
        let mut s = w.samples.clone();
        s.resize(needed, 0.0);
        Waveform {
            samples: s,
            sample_rate_hz: w.sample_rate_hz,
        }
    } else {
        w.clone()
    };

    let power = stft_power(&padded, cfg)?;
    let fb = mel_filterbank(cfg)?;
    let n_frames = power[0].len().min(frames);
    let mut values = vec![0.0f32; cfg.mel_bins * frames];
    for (m, filt) in fb.iter().enumerate() {
        for t in 0..n_frames {
            let mut acc = 0.0f64;
            for (k, &fw) in filt.iter().enumerate() {
                if fw > 0.0 {
                    acc += fw * power[k][t];
                }
            }
            values[m * frames + t] = acc.max(cfg.log_floor).ln() as f32;
        }
        // frames beyond the padded STFT (cannot happen after padding) stay floored
        for t in n_frames..frames {
            values[m * frames + t] = cfg.log_floor.ln() as f32;
        }
    }
    Ok(MelSpectrogram {
        mel_bins: cfg.mel_bins,
        frames,
        values,
        frame_hop_s: cfg.hop_length as f64 / cfg.sample_rate_hz as f64,
    })
}

const CACHE_MAGIC: &[u8; 4] = b"SCF1";

/// Write a feature matrix to the cache format: magic, F, T, hop, config hash,
/// then float32 LE row-major values.
pub fn write_feature_cache(
    mel: &MelSpectrogram,
    cfg_hash: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&(mel.mel_bins as u32).to_le_bytes());
    out.extend_from_slice(&(mel.frames as u32).to_le_bytes());
    out.extend_from_slice(&mel.frame_hop_s.to_le_bytes());
    let hash = cfg_hash.as_bytes();
    out.extend_from_slice(&(hash.len() as u32).to_le_bytes());
    out.extend_from_slice(hash);
    for &v in &mel.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| Error::io(path, e))
}

/// Read a cached feature matrix; returns the matrix and its config hash.
pub fn read_feature_cache(path: impl AsRef<Path>) -> Result<(MelSpectrogram, String)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |reason: &str| Error::InvalidInput(format!("feature cache {path:?}: {reason}"));
    if bytes.len() < 24 || &bytes[0..4] != CACHE_MAGIC {
        return Err(bad("bad magic"));
    }
    let f = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let t = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let hop = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let hlen = u32::from_le_bytes(bytes[20..24].try_into().unwrap()) as usize;
    if bytes.len() < 24 + hlen + 4 * f * t {
        return Err(bad("truncated"));
    }
    let hash = String::from_utf8(bytes[24..24 + hlen].to_vec()).map_err(|_| bad("bad hash"))?;
    let mut values = Vec::with_capacity(f * t);
    let base = 24 + hlen;
    for i in 0..f * t {
        let off = base + 4 * i;
        values.push(f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()));
    }
    Ok((
        MelSpectrogram {
            mel_bins: f,
            frames: t,
            values,
            frame_hop_s: hop,
        },
        hash,
    ))
}
