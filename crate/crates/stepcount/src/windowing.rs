//! Window generation, step-count labels, and runner-independent CV splits.
//!
//! Two windowing strategies: fixed non-overlapping w-second windows, and
//! step-aligned windows that end at the last annotated step strictly before
//! the next w-second boundary. Step membership is half-open [start, end).

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio_io::Waveform;
use crate::dsp::{log_mel, FeatureConfig, MelSpectrogram};
use crate::error::{Error, Result};

/// Ground-truth step timings for one recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepAnnotations {
    pub recording_id: String,
    pub runner_id: String,
    #[serde(default)]
    pub audio_path: Option<String>,
    pub duration_s: f64,
    pub step_times_s: Vec<f64>,
}

impl StepAnnotations {
    pub fn validate(&self) -> Result<()> {
        if !self
            .step_times_s
            .windows(2)
            .all(|p| p[0] < p[1])
        {
            return Err(Error::InvalidInput(format!(
                "{}: step timestamps must be strictly increasing",
                self.recording_id
            )));
        }
        if self
            .step_times_s
            .iter()
            .any(|&t| t < 0.0 || t > self.duration_s)
        {
            return Err(Error::InvalidInput(format!(
                "{}: step timestamps must lie within [0, duration]",
                self.recording_id
            )));
        }
        Ok(())
    }
}

/// Half-open time interval [start_s, end_s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start_s: f64,
    pub end_s: f64,
}

impl Window {
    pub fn len_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Windowing strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Fixed,
    StepAligned,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Fixed => write!(f, "fixed"),
            Strategy::StepAligned => write!(f, "step_aligned"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Strategy::Fixed),
            "step_aligned" | "step-aligned" => Ok(Strategy::StepAligned),
            other => Err(Error::Config(format!("unknown strategy '{other}'"))),
        }
    }
}

/// One training example.
#[derive(Debug, Clone)]
pub struct WindowSample {
    pub window: Window,
    pub label_steps: u32,
    pub features: MelSpectrogram,
    pub recording_id: String,
    pub runner_id: String,
    /// True for step-aligned windows: generating them needs ground-truth
    /// annotations even at inference time.
    pub oracle_dependent: bool,
}

/// Runner-disjoint train/validation/test partition of recording ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_id: String,
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

/// Non-overlapping [0,w), [w,2w), ... windows; the trailing remainder shorter
/// than w is discarded.
pub fn fixed_windows(duration_s: f64, win_len_s: f64) -> Vec<Window> {
    assert!(win_len_s > 0.0, "window length must be positive");
    let n = (duration_s / win_len_s + 1e-9).floor() as usize;
    (0..n)
        .map(|k| Window {
            start_s: k as f64 * win_len_s,
            end_s: (k + 1) as f64 * win_len_s,
        })
        .collect()
}

/// Step-aligned windows: each window ends at the last step strictly before
/// start + w; the next window starts there. Generation stops when no step
/// lies in the open interval (start, start + w).
pub fn step_aligned_windows(ann: &StepAnnotations, win_len_s: f64) -> Result<Vec<Window>> {
    if ann.step_times_s.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: step-aligned windowing needs nonempty annotations",
            ann.recording_id
        )));
    }
    assert!(win_len_s > 0.0, "window length must be positive");
    let mut out = Vec::new();
    let mut start = 0.0f64;
    loop {
        let limit = start + win_len_s;
        let last = ann
            .step_times_s
            .iter()
            .filter(|&&t| t > start && t < limit)
            .last();
        match last {
            Some(&end) => {
                out.push(Window {
                    start_s: start,
                    end_s: end,
                });
                start = end;
            }
            None => break,
        }
    }
    Ok(out)
}

/// Number of annotated steps inside [start, end).
pub fn count_steps(ann: &StepAnnotations, win: &Window) -> u32 {
    let lo = ann.step_times_s.partition_point(|&t| t < win.start_s);
    let hi = ann.step_times_s.partition_point(|&t| t < win.end_s);
    (hi - lo) as u32
}

/// Build labeled feature samples for one recording.
///
/// Step-aligned windows shorter than `win_len_s` are zero-padded to the full
/// feature length before extraction.
pub fn make_samples(
    ann: &StepAnnotations,
    waveform: &Waveform,
    strategy: Strategy,
    win_len_s: f64,
    cfg: &FeatureConfig,
) -> Result<Vec<WindowSample>> {
    ann.validate()?;
    let windows = match strategy {
        Strategy::Fixed => fixed_windows(waveform.duration_s(), win_len_s),
        Strategy::StepAligned => step_aligned_windows(ann, win_len_s)?,
    };
    let full_len = (win_len_s * cfg.sample_rate_hz as f64).round() as usize;
    let mut out = Vec::with_capacity(windows.len());
    for win in windows {
        let mut clip = waveform.slice_seconds(win.start_s, win.end_s);
        if clip.samples.len() < full_len {
            clip.samples.resize(full_len, 0.0);
        }
        let features = log_mel(&clip, cfg)?.standardized();
        out.push(WindowSample {
            window: win,
            label_steps: count_steps(ann, &win),
            features,
            recording_id: ann.recording_id.clone(),
            runner_id: ann.runner_id.clone(),
            oracle_dependent: strategy == Strategy::StepAligned,
        });
    }
    Ok(out)
}

/// Deterministic runner-disjoint 5-fold splits approximating a 60/20/20
/// recording-count partition.
///
/// Runners are ordered by recording count (seeded shuffle breaking ties),
/// greedily assigned to `n_folds` balanced groups, and fold i uses group i as
/// test, group i+1 as validation, and the rest as train.
pub fn generate_splits(
    annotations: &[StepAnnotations],
    n_folds: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    if n_folds < 2 {
        return Err(Error::Config("need at least 2 folds".into()));
    }
    // recordings per runner, order-independent
    let mut per_runner: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for a in annotations {
        per_runner
            .entry(a.runner_id.as_str())
            .or_default()
            .push(a.recording_id.as_str());
    }
    for recs in per_runner.values_mut() {
        recs.sort_unstable();
    }
    if per_runner.len() < n_folds {
        return Err(Error::Config(format!(
            "need at least {n_folds} distinct runners, got {}",
            per_runner.len()
        )));
    }

    let mut runners: Vec<(&str, usize)> = per_runner
        .iter()
        .map(|(r, recs)| (*r, recs.len()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    runners.shuffle(&mut rng);
    // stable sort keeps the shuffled order within equal counts
    runners.sort_by(|a, b| b.1.cmp(&a.1));

    // greedy bin packing into n_folds groups balanced by recording count
    let mut groups: Vec<Vec<&str>> = vec![Vec::new(); n_folds];
    let mut loads = vec![0usize; n_folds];
    for (runner, count) in runners {
        let g = (0..n_folds).min_by_key(|&i| (loads[i], i)).unwrap();
        groups[g].push(runner);
        loads[g] += count;
    }

    let recs_of = |group: &[&str]| -> Vec<String> {
        let mut v: Vec<String> = group
            .iter()
            .flat_map(|r| per_runner[r].iter().map(|s| s.to_string()))
            .collect();
        v.sort_unstable();
        v
    };

    let mut folds = Vec::with_capacity(n_folds);
    for i in 0..n_folds {
        let val = (i + 1) % n_folds;
        let mut train_runners = Vec::new();
        for (g, group) in groups.iter().enumerate() {
            if g != i && g != val {
                train_runners.extend(group.iter().copied());
            }
        }
        folds.push(FoldSplit {
            fold_id: format!("s{i}"),
            train: recs_of(&train_runners),
            validation: recs_of(&groups[val]),
            test: recs_of(&groups[i]),
        });
    }
    Ok(folds)
}
