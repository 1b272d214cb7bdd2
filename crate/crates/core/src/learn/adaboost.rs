//! AdaBoost.R2 (Drucker) over depth-limited regression trees.
//!
//! Each round draws a weighted bootstrap sample, fits a tree on it, scores
//! every training sample by its loss relative to the worst error, and shrinks
//! the weights of well-predicted samples. The ensemble predicts the weighted
//! median of its trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{FeatureRow, RegressionTree};
use super::{AdtConfig, LearnError, Loss, TrainedModel};
use crate::features::{MosSample, FEATURE_NAMES, MOS_MAX, MOS_MIN};

fn sample_loss(loss: Loss, err: f64, max_err: f64) -> f64 {
    let rel = err / max_err;
    match loss {
        Loss::Linear => rel,
        Loss::Square => rel * rel,
        Loss::Exponential => 1.0 - (-rel).exp(),
    }
}

fn weighted_bootstrap(weights: &[f64], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    let last = weights.len() - 1;
    (0..weights.len())
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

/// Validates the dataset and returns `(rows, targets)`.
pub(crate) fn to_arrays(samples: &[MosSample]) -> Result<(Vec<FeatureRow>, Vec<f64>), LearnError> {
    if samples.len() < 2 {
        return Err(LearnError::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let x: Vec<FeatureRow> = samples.iter().map(|s| s.features.to_array()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.mos).collect();
    if y.iter().all(|&v| v == y[0]) {
        return Err(LearnError::DegenerateTargets);
    }
    Ok((x, y))
}

pub fn train_adaboost_r2(samples: &[MosSample], config: &AdtConfig) -> Result<TrainedModel, LearnError> {
    config.validate()?;
    let (x, y) = to_arrays(samples)?;
    Ok(fit(&x, &y, config))
}

pub(crate) fn fit(x: &[FeatureRow], y: &[f64], config: &AdtConfig) -> TrainedModel {
    let n = y.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut weights = vec![1.0 / n as f64; n];
    let mut estimators = Vec::new();
    let mut log_weights = Vec::new();

    for _ in 0..config.n_estimators {
        let idx = weighted_bootstrap(&weights, &mut rng);
        let tree = RegressionTree::fit(x, y, &idx, config.max_tree_depth);
        let errors: Vec<f64> = x
            .iter()
            .zip(y)
            .map(|(row, &target)| (target - tree.predict(row)).abs())
            .collect();
        let max_err = errors.iter().cloned().fold(0.0, f64::max);
        if max_err <= 0.0 {
            // perfect fit: keep it and stop
            estimators.push(tree);
            log_weights.push(1.0);
            break;
        }
        let losses: Vec<f64> = errors
            .iter()
            .map(|&e| sample_loss(config.loss, e, max_err))
            .collect();
        let avg_loss: f64 = weights.iter().zip(&losses).map(|(w, l)| w * l).sum();
        if avg_loss >= 0.5 || avg_loss <= 0.0 {
            if estimators.is_empty() {
                estimators.push(tree);
                log_weights.push(1.0);
            }
            break;
        }
        let beta = avg_loss / (1.0 - avg_loss);
        estimators.push(tree);
        log_weights.push(config.learning_rate * (1.0 / beta).ln());

        for (w, l) in weights.iter_mut().zip(&losses) {
            *w *= beta.powf((1.0 - l) * config.learning_rate);
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            break;
        }
        weights.iter_mut().for_each(|w| *w /= total);
    }

    TrainedModel {
        estimators,
        estimator_log_weights: log_weights,
        thresholds: None,
        config: config.clone(),
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
    }
}

/// Weighted median: the smallest prediction whose cumulative weight (in
/// ascending prediction order) reaches half of the total weight.
pub fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();
    let half = 0.5 * total;
    let mut acc = 0.0;
    for &i in &order {
        acc += weights[i];
        if acc >= half {
            return values[i];
        }
    }
    values[*order.last().expect("non-empty ensemble")]
}

impl TrainedModel {
    /// Weighted median of the estimator outputs, before clamping.
    pub fn predict_raw(&self, row: &FeatureRow) -> Result<f64, LearnError> {
        if self.estimators.is_empty() {
            return Err(LearnError::UntrainedModel);
        }
        let preds: Vec<f64> = self.estimators.iter().map(|t| t.predict(row)).collect();
        Ok(weighted_median(&preds, &self.estimator_log_weights))
    }

    pub fn predict_row(&self, row: &FeatureRow) -> Result<f64, LearnError> {
        Ok(self.predict_raw(row)?.clamp(MOS_MIN, MOS_MAX))
    }
}
