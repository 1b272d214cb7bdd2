//! Synthetic clips with known degradations, for exercising the pipeline
//! without a user study.

mod corpus;
mod degrade;
mod generate;

use std::path::PathBuf;

use thiserror::Error;

pub use corpus::{build_corpus, build_corpus_with, CorpusClip, CorpusOptions, CorpusSummary, GENERATOR_VERSION};
pub use degrade::{
    apply_degradation, blur_frame, blur_plane, gaussian_kernel, synthetic_mos, DegradationSpec, FreezeSpan,
    NetworkProfile, SynthLabel,
};
pub use generate::{generate_pristine, generate_pristine_with, ContentKind, MotionParams};

use crate::features::FeatureError;
use crate::spatial::SpatialError;
use crate::temporal::TemporalError;
use crate::video_io::VideoError;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid clip metadata: {0}")]
    InvalidMeta(String),
    #[error("blur sigma must be finite and non-negative, got {0}")]
    InvalidSigma(f64),
    #[error("freeze span (start {start}, length {length}) does not fit in {frame_count} frames")]
    SpanOutOfBounds { start: usize, length: usize, frame_count: usize },
    #[error("freeze spans {first:?} and {second:?} overlap or touch")]
    OverlappingSpans { first: FreezeSpan, second: FreezeSpan },
    #[error("corpus needs at least {min} clips, got {got}")]
    TooFewClips { min: usize, got: usize },
    #[error("could not make the freezes in {clip_id} detectable")]
    Undetectable { clip_id: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Video { path: PathBuf, source: VideoError },
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}
