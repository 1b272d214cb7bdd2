//! JSON model files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdtConfig, ClassThresholds, LearnError, RegressionTree, TrainedModel};

pub const MODEL_SCHEMA_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u64,
    config: AdtConfig,
    feature_names: Vec<String>,
    trees: Vec<RegressionTree>,
    log_weights: Vec<f64>,
    thresholds: Option<ClassThresholds>,
}

pub fn model_to_json(model: &TrainedModel) -> String {
    let file = ModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        config: model.config.clone(),
        feature_names: model.feature_names.clone(),
        trees: model.estimators.clone(),
        log_weights: model.estimator_log_weights.clone(),
        thresholds: model.thresholds,
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

pub fn model_from_json(text: &str) -> Result<TrainedModel, LearnError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| LearnError::CorruptModel(e.to_string()))?;
    let found = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| LearnError::CorruptModel("missing schema_version".into()))?;
    if found != MODEL_SCHEMA_VERSION {
        return Err(LearnError::SchemaVersionMismatch {
            found,
            expected: MODEL_SCHEMA_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| LearnError::CorruptModel(e.to_string()))?;
    if file.trees.len() != file.log_weights.len() {
        return Err(LearnError::CorruptModel(format!(
            "{} trees but {} weights",
            file.trees.len(),
            file.log_weights.len()
        )));
    }
    for (i, tree) in file.trees.iter().enumerate() {
        tree.validate()
            .map_err(|e| LearnError::CorruptModel(format!("tree {i}: {e}")))?;
    }
    if let Some(th) = file.thresholds {
        ClassThresholds::new(th.m1, th.m2)?;
    }
    Ok(TrainedModel {
        estimators: file.trees,
        estimator_log_weights: file.log_weights,
        thresholds: file.thresholds,
        config: file.config,
        feature_names: file.feature_names,
    })
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), LearnError> {
    fs::write(path, model_to_json(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel, LearnError> {
    model_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{MosSample, QoeFeatures};
    use crate::learn::{predict_mos, train_adaboost_r2};

    fn model() -> TrainedModel {
        let samples: Vec<_> = (0..40)
            .map(|i| MosSample {
                clip_id: String::new(),
                features: QoeFeatures {
                    pbr_percent: (i % 9) as f64 * 3.3,
                    freeze_ratio: i as f64 / 40.0,
                    num_freezes: (i % 4) as u32,
                    total_freeze_seconds: (i % 6) as f64 * 0.7,
                },
                mos: 1.0 + (i % 17) as f64 / 4.0,
            })
            .collect();
        let mut m = train_adaboost_r2(&samples, &Default::default()).unwrap();
        m.thresholds = Some(ClassThresholds::new(2.0, 3.8).unwrap());
        m
    }

    #[test]
    fn round_trip_preserves_predictions() {
        let m = model();
        let back = model_from_json(&model_to_json(&m)).unwrap();
        assert_eq!(back, m);
        for i in 0..100 {
            let f = QoeFeatures {
                pbr_percent: i as f64 * 0.37,
                freeze_ratio: (i as f64 * 0.013) % 1.0,
                num_freezes: i % 5,
                total_freeze_seconds: i as f64 * 0.11,
            };
            assert_eq!(
                predict_mos(&back, &f).unwrap().to_bits(),
                predict_mos(&m, &f).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn wrong_version() {
        let text = model_to_json(&model()).replacen("\"schema_version\": 1", "\"schema_version\": 7", 1);
        assert!(matches!(
            model_from_json(&text),
            Err(LearnError::SchemaVersionMismatch { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn truncated_file() {
        let text = model_to_json(&model());
        assert!(matches!(
            model_from_json(&text[..text.len() / 2]),
            Err(LearnError::CorruptModel(_))
        ));
        assert!(matches!(model_from_json(""), Err(LearnError::CorruptModel(_))));
    }

    #[test]
    fn structural_damage() {
        let m = model();
        let mut v: serde_json::Value = serde_json::from_str(&model_to_json(&m)).unwrap();
        v["log_weights"].as_array_mut().unwrap().pop();
        assert!(matches!(
            model_from_json(&v.to_string()),
            Err(LearnError::CorruptModel(_))
        ));
    }
}
