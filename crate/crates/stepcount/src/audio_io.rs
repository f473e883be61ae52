//! Mono waveform handling: WAV read/write and band-limited resampling.
//!
//! Readers accept PCM16 and IEEE float32 RIFF/WAVE; multi-channel files are
//! averaged down to mono and amplitudes clamped to [-1, 1]. Writes are always
//! PCM16 mono little-endian.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// The canonical internal sample rate used by the feature pipeline.
pub const CANONICAL_RATE_HZ: u32 = 16_000;

/// A mono audio signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub sample_rate_hz: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("waveform contains NaN/Inf".into()));
        }
        let samples = samples.into_iter().map(|s| s.clamp(-1.0, 1.0)).collect();
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Slice the half-open time interval [start_s, end_s) into a new waveform.
    pub fn slice_seconds(&self, start_s: f64, end_s: f64) -> Waveform {
        let sr = self.sample_rate_hz as f64;
        let a = ((start_s * sr).round() as usize).min(self.samples.len());
        let b = ((end_s * sr).round() as usize).clamp(a, self.samples.len());
        Waveform {
            samples: self.samples[a..b].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

fn read_u16(b: &[u8], off: usize) -> u16 {
    u16::from_le_bytes([b[off], b[off + 1]])
}

fn read_u32(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes([b[off], b[off + 1], b[off + 2], b[off + 3]])
}

/// Read a RIFF/WAVE file (PCM16 or float32, any channel count) as mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;

    let fmt_err = |reason: &str| Error::WavFormat {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(fmt_err("missing RIFF/WAVE header"));
    }

    // Walk chunks for fmt and data.
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<(usize, usize)> = None; // (offset, len)
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(&bytes, pos + 4) as usize;
        let body = pos + 8;
        if body + size > bytes.len() {
            return Err(fmt_err("chunk size exceeds file length"));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(fmt_err("fmt chunk too short"));
                }
                fmt = Some((
                    read_u16(&bytes, body),
                    read_u16(&bytes, body + 2),
                    read_u32(&bytes, body + 4),
                    read_u16(&bytes, body + 14),
                ));
            }
            b"data" => data = Some((body, size)),
            _ => {}
        }
        pos = body + size + (size & 1); // chunks are word-aligned
    }

    let (format, channels, rate, bits) = fmt.ok_or_else(|| fmt_err("missing fmt chunk"))?;
    let (doff, dlen) = data.ok_or_else(|| fmt_err("missing data chunk"))?;
    if channels == 0 {
        return Err(fmt_err("zero channels"));
    }
    if rate == 0 {
        return Err(fmt_err("zero sample rate"));
    }

    let codec_err = |reason: String| Error::UnsupportedCodec {
        path: path.to_path_buf(),
        reason,
    };

    let nch = channels as usize;
    let samples: Vec<f32> = match (format, bits) {
        (1, 16) => {
            let n = dlen / 2;
            let frames = n / nch;
            let mut mono = Vec::with_capacity(frames);
            for f in 0..frames {
                let mut acc = 0.0f32;
                for c in 0..nch {
                    let off = doff + 2 * (f * nch + c);
                    let v = i16::from_le_bytes([bytes[off], bytes[off + 1]]);
                    acc += v as f32 / 32768.0;
                }
                mono.push(acc / nch as f32);
            }
            mono
        }
        (3, 32) => {
            let n = dlen / 4;
            let frames = n / nch;
            let mut mono = Vec::with_capacity(frames);
            for f in 0..frames {
                let mut acc = 0.0f32;
                for c in 0..nch {
                    let off = doff + 4 * (f * nch + c);
                    let v = f32::from_le_bytes([
                        bytes[off],
                        bytes[off + 1],
                        bytes[off + 2],
                        bytes[off + 3],
                    ]);
                    acc += v;
                }
                mono.push(acc / nch as f32);
            }
            mono
        }
        (fmt_tag, bits) => {
            return Err(codec_err(format!(
                "format tag {fmt_tag} with {bits} bits per sample"
            )))
        }
    };

    Waveform::new(samples, rate)
}

/// Write a waveform as mono PCM16 little-endian.
pub fn write_wav(w: &Waveform, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let data_len = w.samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&w.sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(w.sample_rate_hz * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &w.samples {
        // scale by 32768 and clamp the top code so the round-trip error stays
        // within one quantization step (2^-15)
        let q = (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| Error::io(path, e))
}

/// Resample to `target_rate_hz` with a Hann-windowed sinc interpolator.
///
/// Same-rate input is returned unchanged. Output length is the input duration
/// rounded to the nearest output sample.
pub fn resample(w: &Waveform, target_rate_hz: u32) -> Result<Waveform> {
    if target_rate_hz == 0 {
        return Err(Error::InvalidInput("target rate must be positive".into()));
    }
    if target_rate_hz == w.sample_rate_hz {
        return Ok(w.clone());
    }
    let src = w.sample_rate_hz as f64;
    let dst = target_rate_hz as f64;
    let out_len = (w.samples.len() as f64 * dst / src).round() as usize;

    // Low-pass at 95% of the tighter Nyquist limit, expressed as a fraction of
    // the input rate.
    let cutoff = 0.95 * 0.5 * (dst.min(src) / src);
    let half_taps: i64 = 32;

    let mut out = Vec::with_capacity(out_len);
    let n_in = w.samples.len() as i64;
    for m in 0..out_len {
        let center = m as f64 * src / dst;
        let i0 = center.floor() as i64;
        let mut acc = 0.0f64;
        for i in (i0 - half_taps + 1)..=(i0 + half_taps) {
            if i < 0 || i >= n_in {
                continue;
            }
            let dt = center - i as f64;
            // sinc low-pass kernel with Hann window over [-half_taps, half_taps]
            let x = 2.0 * cutoff * dt;
            let sinc = if x.abs() < 1e-12 {
                1.0
            } else {
                (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
            };
            let win = 0.5 + 0.5 * (std::f64::consts::PI * dt / half_taps as f64).cos();
            acc += w.samples[i as usize] as f64 * 2.0 * cutoff * sinc * win;
        }
        out.push(acc as f32);
    }
    Waveform::new(out, target_rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sine(freq: f64, rate: u32, seconds: f64, amp: f32) -> Waveform {
        let n = (seconds * rate as f64).round() as usize;
        let samples = (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin() as f32)
            .collect();
        Waveform::new(samples, rate).unwrap()
    }

    #[test]
    fn silence_round_trip() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("silence.wav");
        let w = Waveform::new(vec![0.0; 16_000], 16_000).unwrap();
        write_wav(&w, &p).unwrap();
        let r = read_wav(&p).unwrap();
        assert_eq!(r.samples.len(), 16_000);
        assert!(r.samples.iter().all(|&s| s == 0.0));
        assert_eq!(r.sample_rate_hz, 16_000);
    }

    #[test]
    fn stereo_cancellation_reads_as_zero() {
        // Hand-build a stereo PCM16 file with channels x and -x.
        let dir = tempdir().unwrap();
        let p = dir.path().join("stereo.wav");
        let vals: [i16; 4] = [1000, -2000, 30000, -5];
        let mut data = Vec::new();
        for v in vals {
            data.extend_from_slice(&v.to_le_bytes());
            data.extend_from_slice(&(-v).to_le_bytes());
        }
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&2u16.to_le_bytes());
        out.extend_from_slice(&16_000u32.to_le_bytes());
        out.extend_from_slice(&64_000u32.to_le_bytes());
        out.extend_from_slice(&4u16.to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(&data);
        std::fs::write(&p, out).unwrap();

        let r = read_wav(&p).unwrap();
        assert_eq!(r.samples, vec![0.0; 4]);
    }

    #[test]
    fn pcm16_value_maps_to_half_scale() {
        // Oracle: value / 32768 for a hand-crafted 4-sample mono file.
        let dir = tempdir().unwrap();
        let p = dir.path().join("half.wav");
        let vals: [i16; 4] = [16384, 0, -16384, 8192];
        let mut data = Vec::new();
        for v in vals {
            data.extend_from_slice(&v.to_le_bytes());
        }
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&16_000u32.to_le_bytes());
        out.extend_from_slice(&32_000u32.to_le_bytes());
        out.extend_from_slice(&2u16.to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(&data);
        std::fs::write(&p, out).unwrap();

        let r = read_wav(&p).unwrap();
        for (got, want) in r.samples.iter().zip([0.5f32, 0.0, -0.5, 0.25]) {
            assert!((got - want).abs() < 1e-4, "got {got}, want {want}");
        }
    }

    #[test]
    fn empty_waveform_round_trips() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("empty.wav");
        let w = Waveform::new(vec![], 16_000).unwrap();
        write_wav(&w, &p).unwrap();
        let r = read_wav(&p).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn full_scale_survives_quantization() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("full.wav");
        let w = Waveform::new(vec![1.0], 16_000).unwrap();
        write_wav(&w, &p).unwrap();
        let r = read_wav(&p).unwrap();
        assert!(r.samples[0] >= 0.9999);
    }

    #[test]
    fn float32_wav_reads_back() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("f32.wav");
        let vals: [f32; 3] = [0.25, -0.75, 1.5]; // 1.5 should clamp to 1.0
        let mut data = Vec::new();
        for v in vals {
            data.extend_from_slice(&v.to_le_bytes());
        }
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&3u16.to_le_bytes()); // IEEE float
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&16_000u32.to_le_bytes());
        out.extend_from_slice(&64_000u32.to_le_bytes());
        out.extend_from_slice(&4u16.to_le_bytes());
        out.extend_from_slice(&32u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(&data);
        std::fs::write(&p, out).unwrap();

        let r = read_wav(&p).unwrap();
        assert_eq!(r.samples, vec![0.25, -0.75, 1.0]);
    }

    #[test]
    fn unsupported_codec_is_reported() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("alaw.wav");
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&36u32.to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&6u16.to_le_bytes()); // A-law
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&8_000u32.to_le_bytes());
        out.extend_from_slice(&8_000u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&8u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&0u32.to_le_bytes());
        std::fs::write(&p, out).unwrap();
        assert!(matches!(
            read_wav(&p),
            Err(Error::UnsupportedCodec { .. })
        ));
    }

    #[test]
    fn malformed_header_is_format_error() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("bad.wav");
        std::fs::write(&p, b"not a wav at all").unwrap();
        assert!(matches!(read_wav(&p), Err(Error::WavFormat { .. })));
    }

    proptest::proptest! {
        #[test]
        fn round_trip_bounded_by_quantization(
            samples in proptest::collection::vec(-1.0f32..=1.0, 0..200),
        ) {
            let dir = tempdir().unwrap();
            let p = dir.path().join("rt.wav");
            let w = Waveform::new(samples, 16_000).unwrap();
            write_wav(&w, &p).unwrap();
            let r = read_wav(&p).unwrap();
            proptest::prop_assert_eq!(r.samples.len(), w.samples.len());
            for (a, b) in w.samples.iter().zip(&r.samples) {
                proptest::prop_assert!((a - b).abs() <= 1.0 / 32768.0);
            }
        }
    }

    #[test]
    fn resample_identity_at_same_rate() {
        let w = sine(440.0, 16_000, 0.1, 0.5);
        let r = resample(&w, 16_000).unwrap();
        assert_eq!(r, w);
    }

    #[test]
    fn resample_preserves_tone() {
        // 1 kHz sine at 48 kHz down to 16 kHz, compared against the analytic sine.
        let w = sine(1000.0, 48_000, 1.0, 0.8);
        let r = resample(&w, 16_000).unwrap();
        let reference = sine(1000.0, 16_000, 1.0, 0.8);
        assert_eq!(r.len(), 16_000);
        // normalized correlation, skipping filter edge transients
        let a = &r.samples[100..15_900];
        let b = &reference.samples[100..15_900];
        let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
        let na: f64 = a.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
        assert!(dot / (na * nb) >= 0.999, "corr = {}", dot / (na * nb));
    }

    #[test]
    fn resample_preserves_dc() {
        let w = Waveform::new(vec![0.25; 48_000], 48_000).unwrap();
        let r = resample(&w, 16_000).unwrap();
        let mean: f64 =
            r.samples.iter().map(|&x| x as f64).sum::<f64>() / r.samples.len() as f64;
        assert!((mean - 0.25).abs() < 1e-3, "mean = {mean}");
    }

    #[test]
    fn resample_preserves_duration() {
        let w = sine(200.0, 44_100, 0.731, 0.3);
        let r = resample(&w, 16_000).unwrap();
        let d_in = w.duration_s();
        let d_out = r.duration_s();
        assert!((d_in - d_out).abs() <= 1.0 / 16_000.0 + 1e-9);
    }
}
