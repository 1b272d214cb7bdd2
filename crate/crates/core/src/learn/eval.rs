use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adaboost::{fit, to_arrays};
use super::tree::FeatureRow;
use super::{feature_importance, search_thresholds, AdtConfig, ClassThresholds, LearnError, TrainedModel};
use crate::features::{MosSample, N_FEATURES};
use crate::Execution;

/// Pooled 3-class metrics. Percentages are in `[0, 100]`; `confusion` rows
/// are true labels and columns predicted labels, both ordered bad, average,
/// good.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_samples: usize,
    pub micro_precision: f64,
    pub micro_accuracy: f64,
    pub micro_recall: f64,
    pub mse: f64,
    pub confusion: [[u64; 3]; 3],
    pub feature_importance: [f64; N_FEATURES],
}

#[derive(Default)]
struct Tally {
    confusion: [[u64; 3]; 3],
    squared_error: f64,
    n: usize,
}

impl Tally {
    fn add(&mut self, true_mos: f64, pred_mos: f64, th: &ClassThresholds) {
        self.confusion[th.label(true_mos).index()][th.label(pred_mos).index()] += 1;
        self.squared_error += (true_mos - pred_mos).powi(2);
        self.n += 1;
    }

    fn merge(&mut self, other: Tally) {
        for (row, orow) in self.confusion.iter_mut().zip(other.confusion) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
        self.squared_error += other.squared_error;
        self.n += other.n;
    }

    fn report(self, feature_importance: [f64; N_FEATURES]) -> EvalReport {
        let c = &self.confusion;
        // Micro-averaging pools per-class counts. Every sample contributes
        // exactly one TP or one (FP, FN) pair, so all three ratios coincide.
        let tp: u64 = (0..3).map(|k| c[k][k]).sum();
        let fp: u64 = (0..3).map(|k| (0..3).filter(|&t| t != k).map(|t| c[t][k]).sum::<u64>()).sum();
        let fn_: u64 = (0..3).map(|k| (0..3).filter(|&p| p != k).map(|p| c[k][p]).sum::<u64>()).sum();
        let total: u64 = c.iter().flatten().sum();
        let pct = |num: u64, den: u64| if den == 0 { 0.0 } else { 100.0 * num as f64 / den as f64 };
        EvalReport {
            n_samples: self.n,
            micro_precision: pct(tp, tp + fp),
            micro_accuracy: pct(tp, total),
            micro_recall: pct(tp, tp + fn_),
            mse: if self.n == 0 { 0.0 } else { self.squared_error / self.n as f64 },
            confusion: self.confusion,
            feature_importance,
        }
    }
}

/// Scores a labeled model on `samples`.
pub fn evaluate(model: &TrainedModel, samples: &[MosSample]) -> Result<EvalReport, LearnError> {
    let th = model.thresholds.ok_or(LearnError::MissingThresholds)?;
    if samples.is_empty() {
        return Err(LearnError::EmptyInput);
    }
    let mut tally = Tally::default();
    for s in samples {
        tally.add(s.mos, model.predict_row(&s.features.to_array())?, &th);
    }
    Ok(tally.report(feature_importance(model)?))
}

/// Fold `f` of `n` shuffled samples split into `k` near-equal parts.
fn fold_bounds(n: usize, k: usize, f: usize) -> (usize, usize) {
    let base = n / k;
    let extra = n % k;
    let start = f * base + f.min(extra);
    let len = base + usize::from(f < extra);
    (start, start + len)
}

pub fn kfold_cv(samples: &[MosSample], config: &AdtConfig, k: usize) -> Result<EvalReport, LearnError> {
    kfold_cv_with(samples, config, k, Execution::default())
}

/// K-fold cross-validation. Per fold: fit on the other folds, pick class
/// thresholds from the training-fold predictions, then label and score the
/// held-out fold. Counts and squared errors are pooled over folds; feature
/// importance is the mean over fold models.
pub fn kfold_cv_with(
    samples: &[MosSample],
    config: &AdtConfig,
    k: usize,
    exec: Execution,
) -> Result<EvalReport, LearnError> {
    config.validate()?;
    if k < 2 {
        return Err(LearnError::InvalidConfig(format!("k must be at least 2, got {k}")));
    }
    if samples.len() < k {
        return Err(LearnError::TooFewSamples {
            needed: k,
            got: samples.len(),
        });
    }
    let (x, y) = to_arrays(samples)?;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.rng_seed));

    let run_fold = |f: usize| -> Result<(Tally, [f64; N_FEATURES]), LearnError> {
        let (lo, hi) = fold_bounds(order.len(), k, f);
        let train: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
        let tx: Vec<FeatureRow> = train.iter().map(|&i| x[i]).collect();
        let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        if ty.iter().all(|&v| v == ty[0]) {
            return Err(LearnError::DegenerateTargets);
        }
        let model = fit(&tx, &ty, config);
        let train_pred = tx
            .iter()
            .map(|r| model.predict_row(r))
            .collect::<Result<Vec<_>, _>>()?;
        let th = search_thresholds(&ty, &train_pred)?;
        let mut tally = Tally::default();
        for &i in &order[lo..hi] {
            tally.add(y[i], model.predict_row(&x[i])?, &th);
        }
        Ok((tally, feature_importance(&model)?))
    };

    let mut total = Tally::default();
    let mut importance = [0.0; N_FEATURES];
    for result in exec.map_range(k, run_fold) {
        let (tally, imp) = result?;
        total.merge(tally);
        for (a, v) in importance.iter_mut().zip(imp) {
            *a += v / k as f64;
        }
    }
    Ok(total.report(importance))
}
