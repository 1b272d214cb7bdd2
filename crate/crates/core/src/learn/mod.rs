//! MOS regression and QoE labeling.

mod adaboost;
mod eval;
mod persist;
pub mod thresholds;
pub mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adaboost::{train_adaboost_r2, weighted_median};
pub use eval::{evaluate, kfold_cv, kfold_cv_with, EvalReport};
pub use persist::{load_model, model_from_json, model_to_json, save_model, MODEL_SCHEMA_VERSION};
pub use thresholds::{search_thresholds, ClassThresholds, QoeLabel};
pub use tree::{RegressionTree, TreeNode};

use crate::features::{QoeFeatures, FEATURE_NAMES, N_FEATURES};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("all MOS targets are identical")]
    DegenerateTargets,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model has no estimators")]
    UntrainedModel,
    #[error("model has no class thresholds")]
    MissingThresholds,
    #[error("thresholds must satisfy 1 < m1 < m2 < 5, got m1={m1} m2={m2}")]
    InvalidThresholds { m1: f64, m2: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("model schema version {found}, expected {expected}")]
    SchemaVersionMismatch { found: u64, expected: u64 },
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("model features {found:?} do not match extractor features {expected:?}")]
    FeatureMismatch { found: Vec<String>, expected: Vec<String> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    #[default]
    Linear,
    Square,
    Exponential,
}

impl std::str::FromStr for Loss {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Loss::Linear),
            "square" => Ok(Loss::Square),
            "exponential" => Ok(Loss::Exponential),
            other => Err(format!("unknown loss `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdtConfig {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub loss: Loss,
    pub max_tree_depth: usize,
    pub rng_seed: u64,
}

impl Default for AdtConfig {
    fn default() -> Self {
        AdtConfig {
            n_estimators: 10,
            learning_rate: 0.1,
            loss: Loss::Linear,
            max_tree_depth: 3,
            rng_seed: 0,
        }
    }
}

impl AdtConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.n_estimators == 0 {
            return Err(LearnError::InvalidConfig("n_estimators must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(LearnError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// A boosted tree ensemble plus the class thresholds used to label its output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub estimators: Vec<RegressionTree>,
    /// `learning_rate * ln(1 / beta_t)` per estimator.
    pub estimator_log_weights: Vec<f64>,
    pub thresholds: Option<ClassThresholds>,
    pub config: AdtConfig,
    pub feature_names: Vec<String>,
}

impl TrainedModel {
    pub fn check_feature_names(&self) -> Result<(), LearnError> {
        if self.feature_names.iter().map(String::as_str).ne(FEATURE_NAMES) {
            return Err(LearnError::FeatureMismatch {
                found: self.feature_names.clone(),
                expected: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            });
        }
        Ok(())
    }

    /// Predicted MOS and its label under the stored thresholds.
    pub fn classify(&self, features: &QoeFeatures) -> Result<(f64, QoeLabel), LearnError> {
        let th = self.thresholds.ok_or(LearnError::MissingThresholds)?;
        let mos = predict_mos(self, features)?;
        Ok((mos, th.label(mos)))
    }
}

/// Weighted-median ensemble prediction clamped to `[1, 5]`.
pub fn predict_mos(model: &TrainedModel, features: &QoeFeatures) -> Result<f64, LearnError> {
    model.predict_row(&features.to_array())
}

/// Split-gain importance per feature: each tree's normalized gains, averaged
/// with the estimator weights, renormalized to sum to 1. Falls back to a
/// uniform vector when no tree has a split.
pub fn feature_importance(model: &TrainedModel) -> Result<[f64; N_FEATURES], LearnError> {
    if model.estimators.is_empty() {
        return Err(LearnError::UntrainedModel);
    }
    let mut acc = [0.0; N_FEATURES];
    for (tree, w) in model.estimators.iter().zip(&model.estimator_log_weights) {
        for (a, v) in acc.iter_mut().zip(tree.importance()) {
            *a += w * v;
        }
    }
    let total: f64 = acc.iter().sum();
    if !(total > 0.0) {
        return Ok([1.0 / N_FEATURES as f64; N_FEATURES]);
    }
    acc.iter_mut().for_each(|v| *v /= total);
    Ok(acc)
}
