//! Bad / average / good labeling and the two-threshold grid search.

use serde::{Deserialize, Serialize};

use super::LearnError;

/// Grid indices: thresholds are `k / 20` for `k` in `21..=99` (1.05 to 4.95).
const GRID_FIRST: u32 = 21;
const GRID_LAST: u32 = 99;
const GRID_LEN: usize = (GRID_LAST - GRID_FIRST + 1) as usize;

pub fn grid_value(i: usize) -> f64 {
    (GRID_FIRST + i as u32) as f64 / 20.0
}

/// The threshold grid in ascending order.
pub fn threshold_grid() -> Vec<f64> {
    (0..GRID_LEN).map(grid_value).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QoeLabel {
    Bad,
    Average,
    Good,
}

impl QoeLabel {
    pub const ALL: [QoeLabel; 3] = [QoeLabel::Bad, QoeLabel::Average, QoeLabel::Good];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QoeLabel::Bad => "bad",
            QoeLabel::Average => "average",
            QoeLabel::Good => "good",
        }
    }
}

impl std::fmt::Display for QoeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassThresholds {
    pub m1: f64,
    pub m2: f64,
}

impl ClassThresholds {
    pub fn new(m1: f64, m2: f64) -> Result<Self, LearnError> {
        if !(1.0 < m1 && m1 < m2 && m2 < 5.0) {
            return Err(LearnError::InvalidThresholds { m1, m2 });
        }
        Ok(ClassThresholds { m1, m2 })
    }

    pub fn label(&self, mos: f64) -> QoeLabel {
        if mos < self.m1 {
            QoeLabel::Bad
        } else if mos < self.m2 {
            QoeLabel::Average
        } else {
            QoeLabel::Good
        }
    }
}

/// Number of grid thresholds at or below `mos`.
fn grid_rank(mos: f64) -> usize {
    (0..GRID_LEN).take_while(|&i| grid_value(i) <= mos).count()
}

/// Picks `(m1, m2)` on the 0.05 grid maximizing 3-class agreement between
/// labels of `true_mos` and `predicted_mos`; ties go to the smallest `m1`,
/// then the smallest `m2`. Only pairs that leave every true class non-empty
/// compete; when the true scores admit no such pair, all pairs do.
///
/// A sample with grid ranks `a_t`, `a_p` agrees for grid pair `(i, j)` on
/// three rectangles of the `(i, j)` plane (both bad, both average, both
/// good), so the agreement counts for every pair come from one 2-D prefix
/// sum instead of relabeling all samples per pair.
pub fn search_thresholds(true_mos: &[f64], predicted_mos: &[f64]) -> Result<ClassThresholds, LearnError> {
    if true_mos.len() != predicted_mos.len() {
        return Err(LearnError::LengthMismatch {
            left: true_mos.len(),
            right: predicted_mos.len(),
        });
    }
    if true_mos.is_empty() {
        return Err(LearnError::EmptyInput);
    }
    const S: usize = GRID_LEN + 1;
    let mut diff = vec![0i64; S * S];
    let mut add = |i0: usize, i1: usize, j0: usize, j1: usize| {
        if i0 >= i1 || j0 >= j1 {
            return;
        }
        diff[i0 * S + j0] += 1;
        diff[i0 * S + j1] -= 1;
        diff[i1 * S + j0] -= 1;
        diff[i1 * S + j1] += 1;
    };
    for (&t, &p) in true_mos.iter().zip(predicted_mos) {
        let (at, ap) = (grid_rank(t), grid_rank(p));
        let (lo, hi) = (at.min(ap), at.max(ap));
        add(hi, GRID_LEN, 0, GRID_LEN); // both bad: i >= rank
        add(0, GRID_LEN, 0, lo); // both good: j < rank
        add(0, lo, hi, GRID_LEN); // both average
    }
    // prefix sums in place
    for i in 0..S {
        for j in 0..S {
            let mut v = diff[i * S + j];
            if i > 0 {
                v += diff[(i - 1) * S + j];
            }
            if j > 0 {
                v += diff[i * S + j - 1];
            }
            if i > 0 && j > 0 {
                v -= diff[(i - 1) * S + j - 1];
            }
            diff[i * S + j] = v;
        }
    }
    // at_most[r]: true scores with grid rank <= r
    let mut at_most = [0usize; S];
    for &t in true_mos {
        at_most[grid_rank(t)] += 1;
    }
    for r in 1..S {
        at_most[r] += at_most[r - 1];
    }
    let n = true_mos.len();
    let three_classes = |i: usize, j: usize| at_most[i] > 0 && at_most[j] > at_most[i] && at_most[j] < n;
    let any_three = (0..GRID_LEN).any(|i| (i + 1..GRID_LEN).any(|j| three_classes(i, j)));
    let mut best = (0usize, 1usize, i64::MIN);
    for i in 0..GRID_LEN {
        for j in i + 1..GRID_LEN {
            if any_three && !three_classes(i, j) {
                continue;
            }
            let agree = diff[i * S + j];
            if agree > best.2 {
                best = (i, j, agree);
            }
        }
    }
    Ok(ClassThresholds {
        m1: grid_value(best.0),
        m2: grid_value(best.1),
    })
}
