//! Aligned text renderings of the JSON reports.

use std::fmt::Write as _;

use vqoe::features::FEATURE_NAMES;
use vqoe::learn::EvalReport;
use vqoe::{QoeFeatures, QoeLabel};

pub fn performance(model_name: &str, r: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<8}{:>12}{:>12}{:>12}{:>8}", "Model", "Precision", "Accuracy", "Recall", "MSE");
    let _ = writeln!(
        out,
        "{:<8}{:>12.2}{:>12.2}{:>12.2}{:>8.2}",
        model_name, r.micro_precision, r.micro_accuracy, r.micro_recall, r.mse
    );
    let _ = writeln!(out, "confusion (rows true, columns predicted: bad average good)");
    for (label, row) in QoeLabel::ALL.iter().zip(&r.confusion) {
        let _ = writeln!(out, "{:<8}{:>8}{:>8}{:>8}", label.as_str(), row[0], row[1], row[2]);
    }
    out
}

pub fn importance(values: &[f64]) -> String {
    let mut out = String::from("feature importance\n");
    for (name, v) in FEATURE_NAMES.iter().zip(values) {
        let _ = writeln!(out, "  {name:<22}{v:>8.3}");
    }
    out
}

pub fn features(clip_id: &str, f: &QoeFeatures, mos: Option<f64>, label: Option<QoeLabel>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{clip_id}");
    for (name, v) in FEATURE_NAMES.iter().zip(f.to_array()) {
        let _ = writeln!(out, "  {name:<22}{v:>10.3}");
    }
    if let (Some(mos), Some(label)) = (mos, label) {
        let _ = writeln!(out, "  {:<22}{:>10.3}", "predicted_mos", mos);
        let _ = writeln!(out, "  {:<22}{:>10}", "label", label.as_str());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn performance_columns_line_up() {
        let r = EvalReport {
            n_samples: 10,
            micro_precision: 90.0,
            micro_accuracy: 90.0,
            micro_recall: 90.0,
            mse: 0.29,
            confusion: [[3, 0, 0], [1, 3, 0], [0, 0, 3]],
            feature_importance: [0.25; 4],
        };
        let text = performance("ADT", &r);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].len(), lines[1].len());
        assert!(lines[1].starts_with("ADT"));
        assert!(lines[1].ends_with("0.29"));
        assert!(lines[4].starts_with("average"));
    }
}
