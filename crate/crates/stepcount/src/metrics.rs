//! MAE, calibrated cMAE, PCC, per-fold aggregation, and the cross-validation
//! driver that ties windowing, training, and evaluation together.

use serde::{Deserialize, Serialize};

use crate::audio_io::Waveform;
use crate::dsp::FeatureConfig;
use crate::error::{Error, Result};
use crate::estimators::{
    train, EstimatorKind, NaiveBaseline, PeakPickEstimator, TrainConfig,
};
use crate::manifest::Recording;
use crate::windowing::{make_samples, FoldSplit, Strategy, WindowSample};

/// Mean absolute error.
pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput("mae: length mismatch".into()));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("mae: empty input".into()));
    }
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(&p, &t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64)
}

/// Calibrated MAE: rescale to a common reference window length (20 s) so
/// window sizes compare on equal footing.
pub fn cmae(mae_value: f64, window_len_s: f64, reference_len_s: f64) -> Result<f64> {
    if window_len_s <= 0.0 {
        return Err(Error::InvalidInput("cmae: nonpositive window".into()));
    }
    // ratio first: for the canonical lengths {5, 10, 20} the ratio is a
    // power of two, so the rescaling is exact
    Ok(mae_value * (reference_len_s / window_len_s))
}

pub const CMAE_REFERENCE_LEN_S: f64 = 20.0;

/// Pearson correlation coefficient. Errors when either vector has zero
/// variance; the caller reports that as null, never as 0.
pub fn pcc(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || pred.len() < 2 {
        return Err(Error::InvalidInput(
            "pcc: need equal lengths >= 2".into(),
        ));
    }
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let mt = truth.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vp = 0.0;
    let mut vt = 0.0;
    for (&p, &t) in pred.iter().zip(truth) {
        cov += (p - mp) * (t - mt);
        vp += (p - mp).powi(2);
        vt += (t - mt).powi(2);
    }
    if vp == 0.0 || vt == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "constant predictions or labels".into(),
        ));
    }
    Ok(cov / (vp.sqrt() * vt.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold_id: String,
    pub n_windows: usize,
    pub mae: f64,
    pub cmae: f64,
    /// Null when the correlation is undefined (constant vector).
    pub pcc: Option<f64>,
    pub baseline_mae: f64,
    pub baseline_cmae: f64,
    pub baseline_pcc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub mae: f64,
    pub cmae: f64,
    pub pcc: Option<f64>,
    pub baseline_mae: f64,
    pub baseline_cmae: f64,
    pub baseline_pcc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub estimator: EstimatorKind,
    pub window_len_s: f64,
    pub strategy: Strategy,
    pub config_hash: String,
    /// Step-aligned evaluation needs ground-truth annotations at test time.
    pub oracle_dependent: bool,
    pub per_fold: Vec<FoldMetrics>,
    pub aggregate: AggregateMetrics,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// Arithmetic mean of the per-fold metrics.
pub fn aggregate(per_fold: &[FoldMetrics]) -> AggregateMetrics {
    AggregateMetrics {
        mae: mean(per_fold.iter().map(|f| f.mae)),
        cmae: mean(per_fold.iter().map(|f| f.cmae)),
        pcc: mean_opt(per_fold.iter().map(|f| f.pcc)),
        baseline_mae: mean(per_fold.iter().map(|f| f.baseline_mae)),
        baseline_cmae: mean(per_fold.iter().map(|f| f.baseline_cmae)),
        baseline_pcc: mean_opt(per_fold.iter().map(|f| f.baseline_pcc)),
    }
}

/// A labeled window plus the audio it came from (the classical estimator
/// works on the waveform, not the features).
#[derive(Debug, Clone)]
pub struct EvalSample {
    pub sample: WindowSample,
    pub audio: Option<Waveform>,
}

/// Window every recording under one strategy and extract features; audio
/// clips are retained only when `keep_audio` is set.
pub fn build_eval_samples(
    recordings: &[Recording],
    strategy: Strategy,
    window_len_s: f64,
    feature_cfg: &FeatureConfig,
    keep_audio: bool,
) -> Result<Vec<EvalSample>> {
    let mut out = Vec::new();
    for rec in recordings {
        let samples = make_samples(
            &rec.annotations,
            &rec.waveform,
            strategy,
            window_len_s,
            feature_cfg,
        )?;
        for s in samples {
            let audio = if keep_audio {
                Some(
                    rec.waveform
                        .slice_seconds(s.window.start_s, s.window.end_s),
                )
            } else {
                None
            };
            out.push(EvalSample { sample: s, audio });
        }
    }
    Ok(out)
}

/// Cross-validation settings for one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub window_len_s: f64,
    pub strategy: Strategy,
    pub estimator: EstimatorKind,
    pub feature: FeatureConfig,
    pub train: TrainConfig,
}

fn partition<'a>(samples: &'a [EvalSample], ids: &[String]) -> Vec<&'a EvalSample> {
    let set: std::collections::BTreeSet<&str> = ids.iter().map(String::as_str).collect();
    samples
        .iter()
        .filter(|s| set.contains(s.sample.recording_id.as_str()))
        .collect()
}

/// Run one fold: returns (predictions, truths) on the fold's test partition.
fn run_fold(
    samples: &[EvalSample],
    split: &FoldSplit,
    cfg: &CvConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let test = partition(samples, &split.test);
    if test.is_empty() {
        return Err(Error::InvalidInput(format!(
            "fold {}: empty test partition",
            split.fold_id
        )));
    }
    let truths: Vec<f64> = test.iter().map(|s| s.sample.label_steps as f64).collect();
    let preds = match cfg.estimator {
        EstimatorKind::Naive => {
            let train_labels: Vec<f64> = partition(samples, &split.train)
                .iter()
                .map(|s| s.sample.label_steps as f64)
                .collect();
            let baseline = NaiveBaseline::fit(&train_labels)?;
            vec![baseline.predict(); test.len()]
        }
        EstimatorKind::Peakpick => {
            let est = PeakPickEstimator::default();
            test.iter()
                .map(|s| {
                    let audio = s.audio.as_ref().ok_or_else(|| {
                        Error::InvalidInput("peakpick needs retained audio".into())
                    })?;
                    est.count_padded(audio)
                })
                .collect::<Result<Vec<f64>>>()?
        }
        EstimatorKind::Cnn => {
            let window_samples: Vec<WindowSample> =
                samples.iter().map(|s| s.sample.clone()).collect();
            let outcome = train::train(&window_samples, split, &cfg.train, &cfg.feature.hash())?;
            let feats: Vec<&crate::dsp::MelSpectrogram> =
                test.iter().map(|s| &s.sample.features).collect();
            outcome.model.predict(&feats)?
        }
    };
    Ok((preds, truths))
}

/// Train/evaluate per fold, aggregate across folds, and attach a per-fold
/// naive baseline for comparison.
pub fn cross_validate(
    recordings: &[Recording],
    splits: &[FoldSplit],
    cfg: &CvConfig,
) -> Result<MetricsReport> {
    let keep_audio = cfg.estimator == EstimatorKind::Peakpick;
    let samples = build_eval_samples(
        recordings,
        cfg.strategy,
        cfg.window_len_s,
        &cfg.feature,
        keep_audio,
    )?;
    let mut per_fold = Vec::with_capacity(splits.len());
    for split in splits {
        let (preds, truths) = run_fold(&samples, split, cfg)?;
        let fold_mae = mae(&preds, &truths)?;
        let fold_pcc = pcc(&preds, &truths).ok();

        let train_labels: Vec<f64> = partition(&samples, &split.train)
            .iter()
            .map(|s| s.sample.label_steps as f64)
            .collect();
        let baseline = NaiveBaseline::fit(&train_labels)?;
        let bl_preds = vec![baseline.predict(); truths.len()];
        let bl_mae = mae(&bl_preds, &truths)?;

        per_fold.push(FoldMetrics {
            fold_id: split.fold_id.clone(),
            n_windows: truths.len(),
            mae: fold_mae,
            cmae: cmae(fold_mae, cfg.window_len_s, CMAE_REFERENCE_LEN_S)?,
            pcc: fold_pcc,
            baseline_mae: bl_mae,
            baseline_cmae: cmae(bl_mae, cfg.window_len_s, CMAE_REFERENCE_LEN_S)?,
            baseline_pcc: pcc(&bl_preds, &truths).ok(),
        });
    }
    let agg = aggregate(&per_fold);
    Ok(MetricsReport {
        estimator: cfg.estimator,
        window_len_s: cfg.window_len_s,
        strategy: cfg.strategy,
        config_hash: cfg.feature.hash(),
        oracle_dependent: cfg.strategy == Strategy::StepAligned,
        per_fold,
        aggregate: agg,
    })
}
