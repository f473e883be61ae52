//! Command-line front door for the step-count pipeline: corpus synthesis,
//! feature caching, training, evaluation, cross-validation, ablation grids,
//! and report printing.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use stepcount::augment::AugmentSpec;
use stepcount::dsp::FeatureConfig;
use stepcount::error::{Error, Result};
use stepcount::estimators::cnn::{CnnRegressor, ARCH_ID};
use stepcount::estimators::naive::NaiveBaseline;
use stepcount::estimators::train::{self, TrainConfig};
use stepcount::estimators::EstimatorKind;
use stepcount::manifest::{
    load_manifest_splits, load_recordings, read_manifest, write_corpus, write_manifest,
    write_splits, Recording,
};
use stepcount::metrics::{
    aggregate, build_eval_samples, cmae, cross_validate, mae, pcc, CvConfig, FoldMetrics,
    MetricsReport, CMAE_REFERENCE_LEN_S,
};
use stepcount::nn::checkpoint::{load_checkpoint, save_checkpoint, CheckpointHeader};
use stepcount::synth::{synth_corpus, CorpusParams};
use stepcount::windowing::{generate_splits, FoldSplit, Strategy};

#[derive(Parser)]
#[command(name = "stepcount", version, about = "Audio-based running step-count estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic running corpus (WAVs + annotations + manifest).
    Synth(SynthArgs),
    /// Window a corpus and cache log-mel features to disk.
    Featurize(ConfigOpts),
    /// Train the convolutional regressor on one fold.
    Train(TrainArgs),
    /// Evaluate an estimator on one fold's test partition.
    Eval(EvalArgs),
    /// Run 5-fold cross-validation and write an aggregate report.
    Cv(ConfigOpts),
    /// Run a {window length} x {strategy} x {augment} grid of CV cells.
    Ablate(AblateArgs),
    /// Pretty-print a report or ablation summary JSON.
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for the corpus.
    #[arg(long, default_value = "corpus")]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    runners: usize,
    #[arg(long, default_value_t = 2)]
    per_runner: usize,
    /// Recording length in seconds.
    #[arg(long, default_value_t = 30.0)]
    duration: f64,
    #[arg(long, default_value_t = 150.0)]
    cadence_min: f64,
    #[arg(long, default_value_t = 190.0)]
    cadence_max: f64,
    #[arg(long, default_value_t = 0.03)]
    jitter_min: f64,
    #[arg(long, default_value_t = 0.08)]
    jitter_max: f64,
    /// Number of runner-disjoint CV folds to precompute (0 to skip).
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Experiment settings shared by featurize/train/eval/cv/ablate. Values come
/// from an optional JSON config file; flags override file values.
#[derive(Args, Clone)]
struct ConfigOpts {
    /// JSON experiment config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus manifest path.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory for run artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Window length in seconds (5, 10 or 20).
    #[arg(long)]
    window_len: Option<f64>,
    /// fixed | step_aligned
    #[arg(long)]
    strategy: Option<String>,
    /// naive | peakpick | cnn
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    epochs: Option<u32>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// none | spec_mask | filter_aug | mixup
    #[arg(long)]
    augment: Option<String>,
    /// Mixup Beta-distribution alpha (with --augment mixup).
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    opts: ConfigOpts,
    /// Which CV fold to train on.
    #[arg(long, default_value_t = 0)]
    fold: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    opts: ConfigOpts,
    /// Trained model checkpoint (required for the cnn estimator).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    fold: usize,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    opts: ConfigOpts,
    /// Comma-separated window lengths in seconds.
    #[arg(long, default_value = "5,10,20")]
    window_lens: String,
    /// Comma-separated strategies.
    #[arg(long, default_value = "fixed,step_aligned")]
    strategies: String,
    /// Comma-separated augment names; mixup takes an alpha as `mixup:0.3`.
    #[arg(long, default_value = "none")]
    augments: String,
}

#[derive(Args)]
struct ReportArgs {
    /// A report.json or ablation.json produced by eval/cv/ablate.
    #[arg(long)]
    input: PathBuf,
}

/// Everything that determines a run. Serialized into the run directory as
/// `resolved_config.json`; re-running from that snapshot reproduces the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct ExperimentConfig {
    manifest: PathBuf,
    out_dir: PathBuf,
    seed: u64,
    window_len_s: f64,
    strategy: Strategy,
    estimator: EstimatorKind,
    feature: FeatureConfig,
    train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            manifest: PathBuf::from("corpus/manifest.json"),
            out_dir: PathBuf::from("runs/default"),
            seed: 0,
            window_len_s: 5.0,
            strategy: Strategy::Fixed,
            estimator: EstimatorKind::Cnn,
            feature: FeatureConfig::canonical(),
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if ![5.0, 10.0, 20.0].contains(&self.window_len_s) {
            return Err(Error::Config(format!(
                "window_len_s must be 5, 10 or 20 (got {})",
                self.window_len_s
            )));
        }
        if !self.manifest.exists() {
            return Err(Error::Config(format!(
                "manifest not found: {}",
                self.manifest.display()
            )));
        }
        self.feature.validate()?;
        self.train.validate()
    }
}

impl ConfigOpts {
    /// Layer CLI flags over the config file (or defaults) and validate.
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                // serde_json reports line/column in its message
                serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| {
                    Error::Config(format!("{}: {e}", path.display()))
                })?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(m) = &self.manifest {
            cfg.manifest = m.clone();
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
            cfg.train.seed = s;
        }
        if let Some(w) = self.window_len {
            cfg.window_len_s = w;
        }
        if let Some(s) = &self.strategy {
            cfg.strategy = Strategy::from_str(s)?;
        }
        if let Some(e) = &self.estimator {
            cfg.estimator = EstimatorKind::from_str(e)?;
        }
        if let Some(e) = self.epochs {
            cfg.train.epochs = e;
        }
        if let Some(b) = self.batch_size {
            cfg.train.batch_size = b;
        }
        if let Some(lr) = self.lr {
            cfg.train.lr = lr;
        }
        if let Some(a) = &self.augment {
            cfg.train.augment = parse_augment(a, self.alpha)?;
        } else if let (Some(alpha), AugmentSpec::Mixup { .. }) = (self.alpha, cfg.train.augment) {
            cfg.train.augment = AugmentSpec::Mixup { alpha };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_augment(name: &str, alpha: Option<f64>) -> Result<AugmentSpec> {
    // the `mixup:0.3` form comes from ablation grid cells
    let (name, inline_alpha) = match name.split_once(':') {
        Some((n, a)) => {
            let v: f64 = a
                .parse()
                .map_err(|_| Error::Config(format!("bad mixup alpha '{a}'")))?;
            (n, Some(v))
        }
        None => (name, None),
    };
    match name {
        "none" => Ok(AugmentSpec::None),
        "spec_mask" => Ok(AugmentSpec::default_spec_mask()),
        "filter_aug" => Ok(AugmentSpec::default_filter_aug()),
        "mixup" => Ok(AugmentSpec::Mixup {
            alpha: inline_alpha.or(alpha).unwrap_or(0.3),
        }),
        other => Err(Error::Config(format!("unknown augment '{other}'"))),
    }
}

fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Splits from the manifest when present, otherwise freshly generated and
/// runner-disjoint by construction.
fn resolve_splits(cfg: &ExperimentConfig, recordings: &[Recording]) -> Result<Vec<FoldSplit>> {
    if let Some(splits) = load_manifest_splits(&cfg.manifest)? {
        return Ok(splits);
    }
    let anns: Vec<_> = recordings.iter().map(|r| r.annotations.clone()).collect();
    generate_splits(&anns, 5, cfg.seed)
}

fn pick_fold(splits: &[FoldSplit], fold: usize) -> Result<&FoldSplit> {
    splits.get(fold).ok_or_else(|| {
        Error::Config(format!("fold {fold} out of range (have {})", splits.len()))
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3}"),
        None => "n/a".into(),
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let params = CorpusParams {
        n_runners: args.runners,
        recordings_per_runner: args.per_runner,
        cadence_range_spm: (args.cadence_min, args.cadence_max),
        jitter_range: (args.jitter_min, args.jitter_max),
        duration_s: args.duration,
        seed: args.seed,
        ..CorpusParams::default()
    };
    let corpus = synth_corpus(&params)?;
    let manifest_path = write_corpus(&args.out, &corpus)?;

    // splits need at least one runner per fold; tiny corpora go without
    if args.folds > 0 && args.runners >= args.folds {
        let anns: Vec<_> = corpus.iter().map(|r| r.annotations.clone()).collect();
        let splits = generate_splits(&anns, args.folds, args.seed)?;
        write_splits(&splits, args.out.join("splits.json"))?;
        let mut manifest = read_manifest(&manifest_path)?;
        manifest.splits = Some(PathBuf::from("splits.json"));
        write_manifest(&manifest, &manifest_path)?;
    }

    println!(
        "wrote {} recordings ({} runners x {}, {:.0}s each, cadence {:.0}-{:.0} spm) to {}",
        corpus.len(),
        args.runners,
        args.per_runner,
        args.duration,
        args.cadence_min,
        args.cadence_max,
        args.out.display()
    );
    Ok(())
}

fn cmd_featurize(opts: &ConfigOpts) -> Result<()> {
    let cfg = opts.resolve()?;
    let recordings = load_recordings(&cfg.manifest)?;
    let samples = build_eval_samples(&recordings, cfg.strategy, cfg.window_len_s, &cfg.feature, false)?;
    let dir = cfg.out_dir.join("features");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    #[derive(Serialize)]
    struct IndexEntry {
        recording_id: String,
        start_s: f64,
        end_s: f64,
        label_steps: u32,
        path: String,
    }
    let hash = cfg.feature.hash();
    let mut index = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let rel = format!("features/{}_{i:04}.scf", s.sample.recording_id);
        stepcount::dsp::write_feature_cache(&s.sample.features, &hash, cfg.out_dir.join(&rel))?;
        index.push(IndexEntry {
            recording_id: s.sample.recording_id.clone(),
            start_s: s.sample.window.start_s,
            end_s: s.sample.window.end_s,
            label_steps: s.sample.label_steps,
            path: rel,
        });
    }
    write_json(&index, cfg.out_dir.join("feature_index.json"))?;
    write_json(&cfg, cfg.out_dir.join("resolved_config.json"))?;
    println!(
        "cached {} feature windows ({} strategy, {}s) to {}",
        index.len(),
        cfg.strategy,
        cfg.window_len_s,
        cfg.out_dir.display()
    );
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = args.opts.resolve()?;
    let recordings = load_recordings(&cfg.manifest)?;
    let splits = resolve_splits(&cfg, &recordings)?;
    let split = pick_fold(&splits, args.fold)?;
    let samples = build_eval_samples(&recordings, cfg.strategy, cfg.window_len_s, &cfg.feature, false)?;
    let window_samples: Vec<_> = samples.into_iter().map(|s| s.sample).collect();

    let outcome = train::train(&window_samples, split, &cfg.train, &cfg.feature.hash())?;

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    write_json(&cfg, cfg.out_dir.join("resolved_config.json"))?;
    write_json(&outcome.history, cfg.out_dir.join("history.json"))?;
    let header = CheckpointHeader {
        arch_id: ARCH_ID.into(),
        config_hash: cfg.feature.hash(),
        epoch: outcome.best_epoch,
    };
    save_checkpoint(cfg.out_dir.join("checkpoint.bin"), &header, &outcome.model.params)?;

    println!(
        "trained fold {} for {} epochs; best val MSE {:.4} at epoch {}{}",
        split.fold_id,
        outcome.history.len(),
        outcome.best_val_mse,
        outcome.best_epoch,
        if outcome.diverged { " (stopped: diverged)" } else { "" }
    );
    println!("artifacts in {}", cfg.out_dir.display());
    Ok(())
}

/// Predictions for one estimator on the fold's test partition.
fn eval_fold(
    cfg: &ExperimentConfig,
    recordings: &[Recording],
    split: &FoldSplit,
    checkpoint: Option<&Path>,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let keep_audio = cfg.estimator == EstimatorKind::Peakpick;
    let samples = build_eval_samples(recordings, cfg.strategy, cfg.window_len_s, &cfg.feature, keep_audio)?;
    let in_set = |ids: &[String], rec: &str| ids.iter().any(|i| i == rec);
    let test: Vec<_> = samples
        .iter()
        .filter(|s| in_set(&split.test, &s.sample.recording_id))
        .collect();
    if test.is_empty() {
        return Err(Error::InvalidInput(format!(
            "fold {}: empty test partition",
            split.fold_id
        )));
    }
    let train_labels: Vec<f64> = samples
        .iter()
        .filter(|s| in_set(&split.train, &s.sample.recording_id))
        .map(|s| s.sample.label_steps as f64)
        .collect();
    let truths: Vec<f64> = test.iter().map(|s| s.sample.label_steps as f64).collect();

    let preds = match cfg.estimator {
        EstimatorKind::Naive => {
            let baseline = NaiveBaseline::fit(&train_labels)?;
            vec![baseline.predict(); test.len()]
        }
        EstimatorKind::Peakpick => {
            let est = stepcount::estimators::peakpick::PeakPickEstimator::default();
            test.iter()
                .map(|s| est.count_padded(s.audio.as_ref().expect("audio retained")))
                .collect::<Result<Vec<f64>>>()?
        }
        EstimatorKind::Cnn => {
            let path = checkpoint.ok_or_else(|| {
                Error::Config("cnn evaluation needs --checkpoint".into())
            })?;
            let (header, params) = load_checkpoint(path)?;
            if header.arch_id != ARCH_ID {
                return Err(Error::Checkpoint(format!(
                    "architecture mismatch: checkpoint {} vs binary {ARCH_ID}",
                    header.arch_id
                )));
            }
            let hash = cfg.feature.hash();
            if header.config_hash != hash {
                return Err(Error::Checkpoint(format!(
                    "feature config mismatch: checkpoint {} vs resolved config {hash}",
                    header.config_hash
                )));
            }
            let model = CnnRegressor::from_params(params, &hash)?;
            let feats: Vec<_> = test.iter().map(|s| &s.sample.features).collect();
            model.predict(&feats)?
        }
    };
    Ok((preds, truths, train_labels))
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let cfg = args.opts.resolve()?;
    let recordings = load_recordings(&cfg.manifest)?;
    let splits = resolve_splits(&cfg, &recordings)?;
    let split = pick_fold(&splits, args.fold)?;
    let (preds, truths, train_labels) =
        eval_fold(&cfg, &recordings, split, args.checkpoint.as_deref())?;

    let fold_mae = mae(&preds, &truths)?;
    let baseline = NaiveBaseline::fit(&train_labels)?;
    let bl_preds = vec![baseline.predict(); truths.len()];
    let bl_mae = mae(&bl_preds, &truths)?;
    let fold = FoldMetrics {
        fold_id: split.fold_id.clone(),
        n_windows: truths.len(),
        mae: fold_mae,
        cmae: cmae(fold_mae, cfg.window_len_s, CMAE_REFERENCE_LEN_S)?,
        pcc: pcc(&preds, &truths).ok(),
        baseline_mae: bl_mae,
        baseline_cmae: cmae(bl_mae, cfg.window_len_s, CMAE_REFERENCE_LEN_S)?,
        baseline_pcc: pcc(&bl_preds, &truths).ok(),
    };
    let report = MetricsReport {
        estimator: cfg.estimator,
        window_len_s: cfg.window_len_s,
        strategy: cfg.strategy,
        config_hash: cfg.feature.hash(),
        oracle_dependent: cfg.strategy == Strategy::StepAligned,
        aggregate: aggregate(std::slice::from_ref(&fold)),
        per_fold: vec![fold],
    };
    write_json(&cfg, cfg.out_dir.join("resolved_config.json"))?;
    write_json(&report, cfg.out_dir.join("report.json"))?;
    print_report(&report);
    Ok(())
}

fn cmd_cv(opts: &ConfigOpts) -> Result<()> {
    let cfg = opts.resolve()?;
    let recordings = load_recordings(&cfg.manifest)?;
    let splits = resolve_splits(&cfg, &recordings)?;
    let cv_cfg = CvConfig {
        window_len_s: cfg.window_len_s,
        strategy: cfg.strategy,
        estimator: cfg.estimator,
        feature: cfg.feature.clone(),
        train: cfg.train.clone(),
    };
    let report = cross_validate(&recordings, &splits, &cv_cfg)?;
    write_json(&cfg, cfg.out_dir.join("resolved_config.json"))?;
    write_json(&report, cfg.out_dir.join("report.json"))?;
    print_report(&report);
    Ok(())
}

/// One ablation-grid cell plus its outcome; failed cells carry the error.
#[derive(Debug, Serialize, Deserialize)]
struct AblationCell {
    window_len_s: f64,
    strategy: Strategy,
    augment: String,
    status: String,
    mae: Option<f64>,
    cmae: Option<f64>,
    pcc: Option<f64>,
    baseline_mae: Option<f64>,
    error: Option<String>,
}

fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    let base = args.opts.resolve()?;
    let parse_list = |s: &str| -> Vec<String> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
    };
    let window_lens: Vec<f64> = parse_list(&args.window_lens)
        .iter()
        .map(|t| t.parse().map_err(|_| Error::Config(format!("bad window length '{t}'"))))
        .collect::<Result<_>>()?;
    let strategies: Vec<Strategy> = parse_list(&args.strategies)
        .iter()
        .map(|t| Strategy::from_str(t))
        .collect::<Result<_>>()?;
    let augments = parse_list(&args.augments);
    if window_lens.is_empty() || strategies.is_empty() || augments.is_empty() {
        return Err(Error::Config("ablation grid is empty".into()));
    }

    let recordings = load_recordings(&base.manifest)?;
    let splits = resolve_splits(&base, &recordings)?;
    write_json(&base, base.out_dir.join("resolved_config.json"))?;

    let mut cells = Vec::new();
    for &w in &window_lens {
        for &strategy in &strategies {
            for aug_name in &augments {
                let label = format!("w{w}_{strategy}_{aug_name}").replace(':', "");
                let mut cfg = base.clone();
                cfg.window_len_s = w;
                cfg.strategy = strategy;
                cfg.out_dir = base.out_dir.join(&label);
                let cell = match run_cell(&cfg, aug_name, &recordings, &splits) {
                    Ok(report) => AblationCell {
                        window_len_s: w,
                        strategy,
                        augment: aug_name.clone(),
                        status: "ok".into(),
                        mae: Some(report.aggregate.mae),
                        cmae: Some(report.aggregate.cmae),
                        pcc: report.aggregate.pcc,
                        baseline_mae: Some(report.aggregate.baseline_mae),
                        error: None,
                    },
                    Err(e) => AblationCell {
                        window_len_s: w,
                        strategy,
                        augment: aug_name.clone(),
                        status: "failed".into(),
                        mae: None,
                        cmae: None,
                        pcc: None,
                        baseline_mae: None,
                        error: Some(e.to_string()),
                    },
                };
                cells.push(cell);
            }
        }
    }
    write_json(&cells, base.out_dir.join("ablation.json"))?;
    print_ablation(&cells);
    Ok(())
}

fn run_cell(
    cfg: &ExperimentConfig,
    augment: &str,
    recordings: &[Recording],
    splits: &[FoldSplit],
) -> Result<MetricsReport> {
    let mut cfg = cfg.clone();
    cfg.train.augment = parse_augment(augment, None)?;
    cfg.validate()?;
    let cv_cfg = CvConfig {
        window_len_s: cfg.window_len_s,
        strategy: cfg.strategy,
        estimator: cfg.estimator,
        feature: cfg.feature.clone(),
        train: cfg.train.clone(),
    };
    let report = cross_validate(recordings, splits, &cv_cfg)?;
    write_json(&cfg, cfg.out_dir.join("resolved_config.json"))?;
    write_json(&report, cfg.out_dir.join("report.json"))?;
    Ok(report)
}

fn print_report(report: &MetricsReport) {
    println!(
        "estimator {} | window {}s | {} windows{}",
        report.estimator,
        report.window_len_s,
        report.strategy,
        if report.oracle_dependent { " (oracle-dependent)" } else { "" }
    );
    println!("fold        n      MAE     cMAE      PCC   bl.MAE");
    for f in &report.per_fold {
        println!(
            "{:<8} {:>4}  {:>7.3}  {:>7.3}  {:>7}  {:>7.3}",
            f.fold_id,
            f.n_windows,
            f.mae,
            f.cmae,
            fmt_opt(f.pcc),
            f.baseline_mae
        );
    }
    let a = &report.aggregate;
    println!(
        "aggregate      {:>7.3}  {:>7.3}  {:>7}  {:>7.3}",
        a.mae,
        a.cmae,
        fmt_opt(a.pcc),
        a.baseline_mae
    );
}

fn print_ablation(cells: &[AblationCell]) {
    println!("window  strategy      augment        MAE     cMAE      PCC   bl.MAE");
    for c in cells {
        if c.status == "ok" {
            println!(
                "{:<6}  {:<12}  {:<10} {:>7.3}  {:>7.3}  {:>7}  {:>7.3}",
                c.window_len_s,
                c.strategy.to_string(),
                c.augment,
                c.mae.unwrap(),
                c.cmae.unwrap(),
                fmt_opt(c.pcc),
                c.baseline_mae.unwrap()
            );
        } else {
            println!(
                "{:<6}  {:<12}  {:<10} FAILED: {}",
                c.window_len_s,
                c.strategy.to_string(),
                c.augment,
                c.error.as_deref().unwrap_or("unknown")
            );
        }
    }
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input).map_err(|e| Error::io(&args.input, e))?;
    if let Ok(report) = serde_json::from_str::<MetricsReport>(&text) {
        print_report(&report);
        return Ok(());
    }
    if let Ok(cells) = serde_json::from_str::<Vec<AblationCell>>(&text) {
        print_ablation(&cells);
        return Ok(());
    }
    Err(Error::InvalidInput(format!(
        "{}: neither a metrics report nor an ablation summary",
        args.input.display()
    )))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Featurize(opts) => cmd_featurize(opts),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Cv(opts) => cmd_cv(opts),
        Command::Ablate(args) => cmd_ablate(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with code 2 on usage errors
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
