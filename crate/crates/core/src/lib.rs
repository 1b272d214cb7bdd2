//! No-reference QoE annotation for recorded video calls.
//!
//! The pipeline reads raw 4:2:0 video, computes four handcrafted quality
//! metrics (perceptual bitrate, freeze ratio, freeze count and total freeze
//! duration), regresses them onto a mean opinion score with an AdaBoost.R2
//! tree ensemble and maps the score to a bad / average / good label.
//!
//! Data-parallel loops (per-frame block coding, pairwise duplicate tests,
//! per-clip corpus work, cross-validation folds) run on rayon when the
//! `rayon` feature is enabled, and fall back to plain iterators otherwise.
//! [`Execution`] lets callers pick either path explicitly.

pub mod block;
mod exec;
pub mod features;
pub mod learn;
pub mod spatial;
pub mod synth;
pub mod temporal;
pub mod video_io;

pub use exec::Execution;
pub use features::{extract_features, load_dataset, MosSample, QoeFeatures};
pub use learn::{
    feature_importance, kfold_cv, predict_mos, search_thresholds, train_adaboost_r2, AdtConfig,
    ClassThresholds, EvalReport, QoeLabel, TrainedModel,
};
pub use spatial::{compute_pbr, dct_blur_baseline, intra_encode_size, IntraCoderConfig, PbrResult};
pub use temporal::{detect_freezes, is_duplicate, DecimateThresholds, FreezeEvent, TemporalResult};
pub use video_io::{ClipMeta, FrameRate, FrameYuv};
