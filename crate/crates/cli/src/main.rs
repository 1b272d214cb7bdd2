use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vqoe::features::{extract_with, read_manifest, FeatureError, ExtractOptions};
use vqoe::learn::{
    evaluate, feature_importance, kfold_cv, load_model, predict_mos, save_model, search_thresholds,
    train_adaboost_r2, AdtConfig, EvalReport, LearnError, Loss,
};
use vqoe::synth::{build_corpus, NetworkProfile, SynthError};
use vqoe::video_io::{attach_recorded_bitrate, read_y4m, VideoError};
use vqoe::{
    dct_blur_baseline, load_dataset, ClassThresholds, DecimateThresholds, Execution, IntraCoderConfig, QoeFeatures,
    QoeLabel,
};

mod table;

const REPORT_SCHEMA_VERSION: u32 = 1;
const THREADS_ENV: &str = "VQOE_THREADS";

#[derive(Parser)]
#[command(name = "vqoe", version, about = "No-reference video QoE metrics, MOS regression and labeling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the four quality features of one clip, optionally labeling it.
    Analyze(AnalyzeArgs),
    /// Write a labeled synthetic corpus.
    Synth(SynthArgs),
    /// Cross-validate, then fit and save a model on a whole manifest.
    Train(TrainArgs),
    /// Score a saved model on a manifest.
    Eval(EvalArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Bitrate the clip was recorded at, in bits per second.
    #[arg(long)]
    recorded_bitrate: Option<f64>,
    /// Manifest to look the recorded bitrate up in, keyed by file stem.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u8).range(0..=51))]
    qp: u8,
    #[command(flatten)]
    decimate: DecimateArgs,
    /// Also report the DCT-histogram blur score.
    #[arg(long)]
    baseline_dct: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct DecimateArgs {
    #[arg(long, default_value_t = 768)]
    hi: u32,
    #[arg(long, default_value_t = 320)]
    lo: u32,
    #[arg(long, default_value_t = 0.1)]
    frac: f64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(10..))]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n_estimators: usize,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value = "linear")]
    loss: Loss,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    #[arg(long)]
    out_model: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    pretty: bool,
}

/// A failure and the exit code it maps to.
enum Failure {
    Input(String),
    Model(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Output(_) => 1,
            Failure::Input(_) => 2,
            Failure::Model(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Model(m) | Failure::Output(m) => m,
        }
    }
}

impl From<FeatureError> for Failure {
    fn from(e: FeatureError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<VideoError> for Failure {
    fn from(e: VideoError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<LearnError> for Failure {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::TooFewSamples { .. }
            | LearnError::DegenerateTargets
            | LearnError::EmptyInput
            | LearnError::LengthMismatch { .. }
            | LearnError::InvalidConfig(_) => Failure::Input(e.to_string()),
            _ => Failure::Model(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message().replace('\n', " "));
            ExitCode::from(f.code())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    #[cfg(feature = "rayon")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(format!("{THREADS_ENV}: {e}")))?;
    #[cfg(not(feature = "rayon"))]
    let _ = n;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct AnalyzeReport {
    schema_version: u32,
    clip_id: String,
    features: QoeFeatures,
    #[serde(skip_serializing_if = "Option::is_none")]
    dct_baseline_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_mos: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<QoeLabel>,
    warnings: Vec<String>,
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let thresholds = DecimateThresholds::new(args.decimate.hi, args.decimate.lo, args.decimate.frac)
        .map_err(|e| Failure::Input(e.to_string()))?;
    let coder = IntraCoderConfig::new(args.qp).map_err(|e| Failure::Input(e.to_string()))?;
    // load the model first so a bad model fails before the clip is decoded
    let model = match &args.model {
        Some(path) => {
            let m = load_model(path).map_err(|e| Failure::Model(format!("{}: {e}", path.display())))?;
            m.check_feature_names().map_err(Failure::from)?;
            if m.thresholds.is_none() {
                return Err(LearnError::MissingThresholds.into());
            }
            Some(m)
        }
        None => None,
    };

    let (meta, frames) = read_y4m(&args.input)?;
    let bitrate = match (args.recorded_bitrate, &args.manifest) {
        (Some(b), _) => b,
        (None, Some(manifest)) => lookup_bitrate(manifest, &meta.clip_id)?,
        (None, None) => {
            return Err(Failure::Input(
                "--recorded-bitrate is required unless --manifest lists the clip".into(),
            ))
        }
    };
    let meta = attach_recorded_bitrate(meta, bitrate)?;
    let extraction = extract_with(&frames, &meta, &coder, &thresholds, Execution::default())?;

    let mut warnings = Vec::new();
    if extraction.temporal.still_clip {
        warnings.push("every frame repeats the first; freeze metrics describe a still image".to_string());
    }
    if extraction.pbr.intra_bitrate_bps > extraction.pbr.recorded_bitrate_bps {
        warnings.push(format!(
            "intra-coded bitrate {:.0} bps exceeds the recorded bitrate; pbr clamped to 0",
            extraction.pbr.intra_bitrate_bps
        ));
    }
    let dct_baseline_score = if args.baseline_dct {
        Some(dct_blur_baseline(&frames).map_err(|e| Failure::Input(e.to_string()))?)
    } else {
        None
    };
    let (predicted_mos, label) = match &model {
        Some(m) => {
            let (mos, label) = m.classify(&extraction.features)?;
            (Some(mos), Some(label))
        }
        None => (None, None),
    };
    let report = AnalyzeReport {
        schema_version: REPORT_SCHEMA_VERSION,
        clip_id: meta.clip_id.clone(),
        features: extraction.features,
        dct_baseline_score,
        predicted_mos,
        label,
        warnings,
    };
    write_json(&args.out, &report)?;
    if args.pretty {
        print!("{}", table::features(&report.clip_id, &report.features, predicted_mos, label));
    }
    Ok(())
}

fn lookup_bitrate(manifest: &Path, clip_id: &str) -> Result<f64, Failure> {
    read_manifest(manifest)?
        .into_iter()
        .find(|r| r.clip_id == clip_id)
        .map(|r| r.recorded_bitrate_bps)
        .ok_or_else(|| Failure::Input(format!("{}: no row for clip `{clip_id}`", manifest.display())))
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let summary = build_corpus(args.n as usize, args.seed, &args.out_dir)?;
    let count = |p| summary.clips_with(p).count();
    println!(
        "wrote {} clips to {} (bad {}, average {}, good {})",
        summary.n_clips,
        args.out_dir.display(),
        count(NetworkProfile::Bad),
        count(NetworkProfile::Average),
        count(NetworkProfile::Good)
    );
    Ok(())
}

#[derive(Serialize)]
struct TrainReport {
    schema_version: u32,
    manifest: String,
    model: String,
    folds: u64,
    config: AdtConfig,
    cross_validation: EvalReport,
    thresholds: ClassThresholds,
    feature_importance: [f64; 4],
    training_mse: f64,
}

fn train(args: TrainArgs) -> Result<(), Failure> {
    let config = AdtConfig {
        n_estimators: args.n_estimators,
        learning_rate: args.learning_rate,
        loss: args.loss,
        max_tree_depth: args.max_depth,
        rng_seed: args.seed,
    };
    config.validate()?;
    let samples = load_dataset(&args.manifest, &ExtractOptions::default())?;
    let cv = kfold_cv(&samples, &config, args.folds as usize)?;

    let mut model = train_adaboost_r2(&samples, &config)?;
    let truth: Vec<f64> = samples.iter().map(|s| s.mos).collect();
    let pred = samples
        .iter()
        .map(|s| predict_mos(&model, &s.features))
        .collect::<Result<Vec<_>, _>>()?;
    let thresholds = search_thresholds(&truth, &pred)?;
    model.thresholds = Some(thresholds);
    save_model(&model, &args.out_model)
        .map_err(|e| Failure::Output(format!("{}: {e}", args.out_model.display())))?;

    let training_mse = truth.iter().zip(&pred).map(|(t, p)| (t - p).powi(2)).sum::<f64>() / truth.len() as f64;
    let report = TrainReport {
        schema_version: REPORT_SCHEMA_VERSION,
        manifest: args.manifest.display().to_string(),
        model: args.out_model.display().to_string(),
        folds: args.folds,
        config,
        cross_validation: cv,
        thresholds,
        feature_importance: feature_importance(&model)?,
        training_mse,
    };
    write_json(&args.report, &report)?;
    if args.pretty {
        let mut out = table::performance("ADT", &report.cross_validation);
        let _ = writeln!(out, "thresholds: m1={} m2={}", thresholds.m1, thresholds.m2);
        out.push_str(&table::importance(&report.feature_importance));
        print!("{out}");
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput {
    schema_version: u32,
    manifest: String,
    model: String,
    thresholds: ClassThresholds,
    evaluation: EvalReport,
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let model = load_model(&args.model).map_err(|e| Failure::Model(format!("{}: {e}", args.model.display())))?;
    model.check_feature_names()?;
    let thresholds = model.thresholds.ok_or(LearnError::MissingThresholds)?;
    let samples = load_dataset(&args.manifest, &ExtractOptions::default())?;
    let evaluation = evaluate(&model, &samples)?;
    let out = EvalOutput {
        schema_version: REPORT_SCHEMA_VERSION,
        manifest: args.manifest.display().to_string(),
        model: args.model.display().to_string(),
        thresholds,
        evaluation,
    };
    write_json(&args.report, &out)?;
    if args.pretty {
        print!("{}", table::performance("ADT", &out.evaluation));
    }
    Ok(())
}
