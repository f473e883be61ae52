//! Synthetic running-audio generator with exact ground-truth step timings.
//!
//! Each step is an exponentially decaying noise burst over a pink-ish noise
//! floor; cadence is per-runner, jitter and noise vary per recording. Fully
//! deterministic given the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::audio_io::{Waveform, CANONICAL_RATE_HZ};
use crate::error::{Error, Result};
use crate::windowing::StepAnnotations;

/// Surface character of the rendered footfalls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceTone {
    /// Low-passed (2 kHz) footfall bursts.
    Soft,
    /// Broadband footfall bursts.
    Hard,
}

/// Parameters for one synthetic recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthProfile {
    pub cadence_spm: f64,
    /// Fractional std-dev of the inter-step interval, in [0, 0.3].
    pub cadence_jitter: f64,
    pub step_gain_db: f64,
    pub noise_floor_db: f64,
    pub step_decay_ms: f64,
    pub surface_tone: SurfaceTone,
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for SynthProfile {
    fn default() -> Self {
        SynthProfile {
            cadence_spm: 170.0,
            cadence_jitter: 0.05,
            step_gain_db: -6.0,
            noise_floor_db: -40.0,
            step_decay_ms: 25.0,
            surface_tone: SurfaceTone::Hard,
            duration_s: 30.0,
            seed: 0,
        }
    }
}

impl SynthProfile {
    pub fn validate(&self) -> Result<()> {
        if self.cadence_spm <= 0.0 {
            return Err(Error::InvalidInput("cadence must be positive".into()));
        }
        if !(0.0..=0.3).contains(&self.cadence_jitter) {
            return Err(Error::InvalidInput("jitter must be in [0, 0.3]".into()));
        }
        if self.duration_s <= 0.0 {
            return Err(Error::InvalidInput("duration must be positive".into()));
        }
        Ok(())
    }
}

fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

fn rms(s: &[f32]) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    (s.iter().map(|&x| (x as f64).powi(2)).sum::<f64>() / s.len() as f64).sqrt()
}

/// Render one recording. Step events start at 0.2 s and advance by
/// 60/cadence seconds with multiplicative jitter; events past the duration
/// are truncated.
pub fn synth_recording(
    profile: &SynthProfile,
    recording_id: &str,
    runner_id: &str,
) -> Result<(Waveform, StepAnnotations)> {
    profile.validate()?;
    let sr = CANONICAL_RATE_HZ as usize;
    let n = (profile.duration_s * sr as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let normal = Normal::new(0.0f64, 1.0).unwrap();

    // step event times
    let delta = 60.0 / profile.cadence_spm;
    let mut events = Vec::new();
    let mut t = 0.2f64;
    while t < profile.duration_s {
        events.push(t);
        let factor = (1.0 + profile.cadence_jitter * normal.sample(&mut rng)).max(0.1);
        t += delta * factor;
    }

    // pink-ish noise floor: leaky-integrated white noise scaled to target RMS
    let mut samples = vec![0.0f32; n];
    let mut p = 0.0f64;
    for s in samples.iter_mut() {
        let w: f64 = normal.sample(&mut rng);
        p = 0.97 * p + w;
        *s = p as f32;
    }
    let floor_rms = db_to_lin(profile.noise_floor_db);
    let cur = rms(&samples).max(1e-12);
    let scale = (floor_rms / cur) as f32;
    for s in samples.iter_mut() {
        *s *= scale;
    }

    // footfall bursts: enveloped noise, optionally low-passed for soft surface
    let tau = profile.step_decay_ms / 1000.0;
    let burst_len = ((5.0 * tau) * sr as f64).round() as usize;
    let gain = db_to_lin(profile.step_gain_db);
    let lp_coeff = match profile.surface_tone {
        SurfaceTone::Hard => 0.0,
        SurfaceTone::Soft => (-2.0 * std::f64::consts::PI * 2000.0 / sr as f64).exp(),
    };
    for &ev in &events {
        let start = (ev * sr as f64).round() as usize;
        let mut lp = 0.0f64;
        for i in 0..burst_len {
            let idx = start + i;
            if idx >= n {
                break;
            }
            let w: f64 = normal.sample(&mut rng);
            let shaped = if lp_coeff > 0.0 {
                lp = lp_coeff * lp + (1.0 - lp_coeff) * w;
                lp * 3.0 // rough level make-up for the low-pass
            } else {
                w
            };
            let env = (-(i as f64) / (tau * sr as f64)).exp();
            samples[idx] += (gain * 0.5 * shaped * env) as f32;
        }
    }
    for s in samples.iter_mut() {
        *s = s.clamp(-1.0, 1.0);
    }

    let ann = StepAnnotations {
        recording_id: recording_id.to_string(),
        runner_id: runner_id.to_string(),
        audio_path: None,
        duration_s: profile.duration_s,
        step_times_s: events,
    };
    Ok((Waveform::new(samples, CANONICAL_RATE_HZ)?, ann))
}

/// Per-recording draw ranges for corpus generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub n_runners: usize,
    pub recordings_per_runner: usize,
    pub cadence_range_spm: (f64, f64),
    pub jitter_range: (f64, f64),
    pub step_gain_db_range: (f64, f64),
    pub noise_floor_db_range: (f64, f64),
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            n_runners: 10,
            recordings_per_runner: 2,
            cadence_range_spm: (150.0, 190.0),
            jitter_range: (0.03, 0.08),
            step_gain_db_range: (-8.0, -4.0),
            noise_floor_db_range: (-45.0, -35.0),
            duration_s: 30.0,
            seed: 0,
        }
    }
}

/// One generated recording plus its profile.
#[derive(Debug, Clone)]
pub struct SynthRecording {
    pub profile: SynthProfile,
    pub waveform: Waveform,
    pub annotations: StepAnnotations,
}

/// Generate a corpus: cadence drawn once per runner, jitter/noise per
/// recording, everything derived from the corpus seed.
pub fn synth_corpus(params: &CorpusParams) -> Result<Vec<SynthRecording>> {
    if params.n_runners == 0 || params.recordings_per_runner == 0 {
        return Err(Error::Config("corpus counts must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut out = Vec::with_capacity(params.n_runners * params.recordings_per_runner);
    for r in 0..params.n_runners {
        let cadence = rng.gen_range(params.cadence_range_spm.0..params.cadence_range_spm.1);
        for k in 0..params.recordings_per_runner {
            let profile = SynthProfile {
                cadence_spm: cadence,
                cadence_jitter: rng.gen_range(params.jitter_range.0..=params.jitter_range.1),
                step_gain_db: rng
                    .gen_range(params.step_gain_db_range.0..=params.step_gain_db_range.1),
                noise_floor_db: rng
                    .gen_range(params.noise_floor_db_range.0..=params.noise_floor_db_range.1),
                step_decay_ms: 25.0,
                surface_tone: if rng.gen_bool(0.5) {
                    SurfaceTone::Hard
                } else {
                    SurfaceTone::Soft
                },
                duration_s: params.duration_s,
                seed: rng.gen(),
            };
            let recording_id = format!("runner{r:03}_rec{k:02}");
            let runner_id = format!("runner{r:03}");
            let (waveform, annotations) = synth_recording(&profile, &recording_id, &runner_id)?;
            out.push(SynthRecording {
                profile,
                waveform,
                annotations,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::windowing::{count_steps, fixed_windows, Window};

    fn clean_profile() -> SynthProfile {
        SynthProfile {
            cadence_spm: 180.0,
            cadence_jitter: 0.0,
            noise_floor_db: -120.0,
            step_gain_db: -6.0,
            duration_s: 10.0,
            seed: 42,
            ..SynthProfile::default()
        }
    }

    #[test]
    fn jitter_free_cadence_spacing() {
        let (_, ann) = synth_recording(&clean_profile(), "r", "u").unwrap();
        // 180 spm = 1/3 s spacing from 0.2 s; brute-force count inside [0, 10)
        let expect: Vec<f64> = (0..)
            .map(|i| 0.2 + i as f64 / 3.0)
            .take_while(|&t| t < 10.0)
            .collect();
        assert_eq!(ann.step_times_s.len(), expect.len());
        assert!(ann.step_times_s.len() == 29 || ann.step_times_s.len() == 30);
        for (a, b) in ann.step_times_s.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn bursts_dominate_floor() {
        let (w, ann) = synth_recording(&clean_profile(), "r", "u").unwrap();
        let sr = w.sample_rate_hz as f64;
        let mut in_burst = Vec::new();
        let mut between = Vec::new();
        for &t in &ann.step_times_s {
            let a = (t * sr) as usize;
            let b = (((t + 0.02) * sr) as usize).min(w.len());
            in_burst.extend_from_slice(&w.samples[a..b]);
            let c = ((t + 0.2) * sr) as usize;
            let d = ((t + 0.25) * sr) as usize;
            if d <= w.len() {
                between.extend_from_slice(&w.samples[c..d]);
            }
        }
        assert!(rms(&in_burst) >= 10.0 * rms(&between).max(1e-12));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let p = clean_profile();
        let (w1, a1) = synth_recording(&p, "r", "u").unwrap();
        let (w2, a2) = synth_recording(&p, "r", "u").unwrap();
        assert_eq!(w1, w2);
        assert_eq!(a1, a2);
    }

    #[test]
    fn ground_truth_consistency_with_count_steps() {
        let p = SynthProfile {
            cadence_jitter: 0.05,
            seed: 9,
            ..clean_profile()
        };
        let (_, ann) = synth_recording(&p, "r", "u").unwrap();
        for win in fixed_windows(ann.duration_s, 2.5) {
            let brute = ann
                .step_times_s
                .iter()
                .filter(|&&t| t >= win.start_s && t < win.end_s)
                .count() as u32;
            assert_eq!(count_steps(&ann, &win), brute);
        }
    }

    #[test]
    fn envelope_autocorrelation_recovers_cadence() {
        // jitter 0: the envelope's autocorrelation must peak at 60/cadence.
        let p = SynthProfile {
            noise_floor_db: -60.0,
            ..clean_profile()
        };
        let (w, _) = synth_recording(&p, "r", "u").unwrap();
        let sr = w.sample_rate_hz as usize;
        // 5 ms RMS envelope
        let hop = sr / 200;
        let env: Vec<f64> = w
            .samples
            .chunks(hop)
            .map(|c| rms(c))
            .collect();
        let mean = env.iter().sum::<f64>() / env.len() as f64;
        let env: Vec<f64> = env.iter().map(|e| e - mean).collect();
        let env_sr = 200.0;
        let lag_lo = (0.2 * env_sr) as usize; // 300 spm ceiling
        let lag_hi = (0.6 * env_sr) as usize;
        let mut best = (0usize, f64::MIN);
        for lag in lag_lo..=lag_hi {
            let c: f64 = env[..env.len() - lag]
                .iter()
                .zip(&env[lag..])
                .map(|(a, b)| a * b)
                .sum();
            if c > best.1 {
                best = (lag, c);
            }
        }
        let period = best.0 as f64 / env_sr;
        assert!(
            (period - 60.0 / p.cadence_spm).abs() <= 0.010,
            "autocorr period {period}"
        );
    }

    #[test]
    fn corpus_counts_and_runner_identity() {
        let params = CorpusParams {
            n_runners: 5,
            recordings_per_runner: 2,
            duration_s: 5.0,
            ..CorpusParams::default()
        };
        let corpus = synth_corpus(&params).unwrap();
        assert_eq!(corpus.len(), 10);
        let runners: std::collections::BTreeSet<_> = corpus
            .iter()
            .map(|r| r.annotations.runner_id.clone())
            .collect();
        assert_eq!(runners.len(), 5);
        // per-runner cadence constant, pairwise distinct between runners
        let mut by_runner: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
        for r in &corpus {
            by_runner
                .entry(r.annotations.runner_id.clone())
                .or_default()
                .push(r.profile.cadence_spm);
        }
        let mut cadences = Vec::new();
        for (_, cs) in by_runner {
            assert!(cs.windows(2).all(|p| p[0] == p[1]));
            cadences.push(cs[0]);
        }
        for i in 0..cadences.len() {
            for j in i + 1..cadences.len() {
                assert_ne!(cadences[i], cadences[j]);
            }
        }
    }

    #[test]
    fn corpus_mean_label_in_cadence_bounds() {
        let params = CorpusParams {
            n_runners: 8,
            recordings_per_runner: 1,
            duration_s: 20.0,
            ..CorpusParams::default()
        };
        let corpus = synth_corpus(&params).unwrap();
        let mut labels = Vec::new();
        for r in &corpus {
            for win in fixed_windows(r.annotations.duration_s, 5.0) {
                labels.push(count_steps(&r.annotations, &win) as f64);
            }
        }
        let mean = labels.iter().sum::<f64>() / labels.len() as f64;
        // cadence 150-190 spm over 5 s: 12.5 .. 15.8 expected steps
        assert!((12.5..=15.8).contains(&mean), "mean label {mean}");
    }

    #[test]
    fn window_boundary_event() {
        // first step at 0.2 s, never 0.0: boundary ties come from windows, not data
        let (_, ann) = synth_recording(&clean_profile(), "r", "u").unwrap();
        assert!((ann.step_times_s[0] - 0.2).abs() < 1e-12);
        // a window ending exactly on a step time excludes it
        let t = ann.step_times_s[5];
        let win = Window {
            start_s: 0.0,
            end_s: t,
        };
        assert_eq!(count_steps(&ann, &win), 5);
    }
}
