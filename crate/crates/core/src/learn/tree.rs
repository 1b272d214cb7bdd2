//! Depth-limited CART regression tree (squared-error splits).

use serde::{Deserialize, Serialize};

use crate::features::N_FEATURES;

pub type FeatureRow = [f64; N_FEATURES];

/// One node of a flattened tree. Internal nodes carry `feature_idx`,
/// `split_value`, `left` and `right`; leaves carry `leaf_value`.
/// Samples with `x[feature_idx] <= split_value` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature_idx: Option<usize>,
    pub split_value: Option<f64>,
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub leaf_value: Option<f64>,
    /// Reduction in summed squared error achieved by this split.
    #[serde(default)]
    pub gain: f64,
}

impl TreeNode {
    fn leaf(value: f64) -> Self {
        TreeNode {
            feature_idx: None,
            split_value: None,
            left: None,
            right: None,
            leaf_value: Some(value),
            gain: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

struct Split {
    feature: usize,
    value: f64,
    gain: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn mean(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

fn best_split(x: &[FeatureRow], y: &[f64], idx: &[usize]) -> Option<Split> {
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| y[i]).sum();
    let parent = total * total / n as f64;
    let mut best: Option<(usize, usize, f64, f64)> = None; // feature, cut position, value, gain
    let mut order = idx.to_vec();
    for f in 0..N_FEATURES {
        order.copy_from_slice(idx);
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
        let mut left_sum = 0.0;
        for cut in 1..n {
            left_sum += y[order[cut - 1]];
            let lo = x[order[cut - 1]][f];
            let hi = x[order[cut]][f];
            if lo == hi {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / cut as f64 + right_sum * right_sum / (n - cut) as f64 - parent;
            // identical partitions reached through different sort orders
            // differ only in rounding; keep the earliest feature and cut
            if best.is_none_or(|b| gain > b.3 + 1e-9 * (1.0 + b.3.abs())) {
                let mut value = lo + (hi - lo) / 2.0;
                if value >= hi {
                    value = lo;
                }
                best = Some((f, cut, value, gain));
            }
        }
    }
    let (feature, _, value, gain) = best?;
    // Guard against splits that only shuffle rounding noise.
    if !(gain > 1e-12 * (1.0 + parent.abs())) {
        return None;
    }
    let (left, right) = idx.iter().partition(|&&i| x[i][feature] <= value);
    Some(Split {
        feature,
        value,
        gain,
        left,
        right,
    })
}

impl RegressionTree {
    /// Fits on the rows listed in `idx`; repeated indices act as repeated
    /// samples (bootstrap draws).
    pub fn fit(x: &[FeatureRow], y: &[f64], idx: &[usize], max_depth: usize) -> Self {
        assert!(!idx.is_empty(), "cannot fit a tree on zero samples");
        let mut tree = RegressionTree { nodes: Vec::new() };
        tree.grow(x, y, idx.to_vec(), max_depth);
        tree
    }

    fn grow(&mut self, x: &[FeatureRow], y: &[f64], idx: Vec<usize>, depth_left: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode::leaf(mean(y, &idx)));
        if depth_left == 0 || idx.len() < 2 {
            return id;
        }
        let Some(split) = best_split(x, y, &idx) else {
            return id;
        };
        let left = self.grow(x, y, split.left, depth_left - 1);
        let right = self.grow(x, y, split.right, depth_left - 1);
        self.nodes[id] = TreeNode {
            feature_idx: Some(split.feature),
            split_value: Some(split.value),
            left: Some(left),
            right: Some(right),
            leaf_value: None,
            gain: split.gain,
        };
        id
    }

    pub fn predict(&self, row: &FeatureRow) -> f64 {
        let mut node = &self.nodes[0];
        loop {
            match (node.feature_idx, node.split_value, node.left, node.right) {
                (Some(f), Some(s), Some(l), Some(r)) => {
                    node = &self.nodes[if row[f] <= s { l } else { r }];
                }
                _ => return node.leaf_value.unwrap_or(f64::NAN),
            }
        }
    }

    /// Per-feature split gain totals normalized to sum to 1; all zeros for a
    /// tree without splits.
    pub fn importance(&self) -> [f64; N_FEATURES] {
        let mut imp = [0.0; N_FEATURES];
        for node in &self.nodes {
            if let Some(f) = node.feature_idx {
                imp[f] += node.gain;
            }
        }
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            imp.iter_mut().for_each(|v| *v /= total);
        }
        imp
    }

    /// Structural check used when loading trees from disk.
    pub fn validate(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match (node.feature_idx, node.split_value, node.left, node.right, node.leaf_value) {
                (Some(f), Some(s), Some(l), Some(r), None) => {
                    if f >= N_FEATURES || !s.is_finite() {
                        return Err(format!("node {i} has an invalid split"));
                    }
                    // children are always stored after their parent
                    if l <= i || r <= i || l >= self.nodes.len() || r >= self.nodes.len() {
                        return Err(format!("node {i} has out-of-range children"));
                    }
                }
                (None, None, None, None, Some(v)) if v.is_finite() => {}
                _ => return Err(format!("node {i} is neither a split nor a leaf")),
            }
        }
        Ok(())
    }
}
