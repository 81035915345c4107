//! Exact greedy split search over pre-sorted feature columns.

use rayon::prelude::*;

use crate::matrix::FeatureMatrix;

use super::objective::{split_gain, GradHess};
use super::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    /// Rows with `value < threshold` go left.
    pub threshold: f64,
    pub gain: f64,
}

/// Threshold between two adjacent distinct sorted values `lo < hi`: their
/// midpoint, or `hi` when the midpoint rounds down onto `lo`.
pub fn split_threshold(lo: f64, hi: f64) -> f64 {
    let mid = lo * 0.5 + hi * 0.5;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

/// Row indices of every feature column, sorted by `(value, row)`.
#[derive(Debug, Clone)]
pub(crate) struct SortedColumns {
    order: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub(crate) fn new(matrix: &FeatureMatrix) -> Self {
        let n = matrix.n_rows() as u32;
        let order = (0..matrix.n_cols())
            .into_par_iter()
            .map(|j| {
                let mut rows: Vec<u32> = (0..n).collect();
                rows.sort_by(|&a, &b| {
                    matrix
                        .get(a as usize, j)
                        .total_cmp(&matrix.get(b as usize, j))
                        .then(a.cmp(&b))
                });
                rows
            })
            .collect();
        Self { order }
    }
}

pub(crate) const NO_SLOT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SlotTotals {
    pub g: f64,
    pub h: f64,
}

#[derive(Clone, Copy)]
struct ScanState {
    g_left: f64,
    h_left: f64,
    prev: Option<f64>,
    best: Option<SplitCandidate>,
}

/// Best split per frontier slot. `slot_of_row[i]` names the slot row `i`
/// belongs to, or `NO_SLOT` when the row takes no part in this search.
///
/// Within a feature, a candidate replaces the incumbent only on strictly
/// larger gain, and features are reduced in index order the same way, so
/// ties go to the lower feature and then the lower threshold no matter how
/// the per-feature scans were scheduled.
pub(crate) fn best_splits(
    matrix: &FeatureMatrix,
    sorted: &SortedColumns,
    gh: &[GradHess],
    slot_of_row: &[u32],
    totals: &[SlotTotals],
    config: &TrainConfig,
) -> Vec<Option<SplitCandidate>> {
    let scan = |feature: usize| -> Vec<Option<SplitCandidate>> {
        let mut states = vec![
            ScanState {
                g_left: 0.0,
                h_left: 0.0,
                prev: None,
                best: None,
            };
            totals.len()
        ];
        for &row in &sorted.order[feature] {
            let row = row as usize;
            let slot = slot_of_row[row];
            if slot == NO_SLOT {
                continue;
            }
            let slot = slot as usize;
            let state = &mut states[slot];
            let value = matrix.get(row, feature);
            if let Some(prev) = state.prev {
                if value > prev {
                    consider(state, &totals[slot], feature, prev, value, config);
                }
            }
            state.g_left += gh[row].g;
            state.h_left += gh[row].h;
            state.prev = Some(value);
        }
        states.into_iter().map(|s| s.best).collect()
    };

    let work = slot_of_row.len() * matrix.n_cols();
    let per_feature: Vec<Vec<Option<SplitCandidate>>> = if work >= 1 << 14 {
        (0..matrix.n_cols()).into_par_iter().map(scan).collect()
    } else {
        (0..matrix.n_cols()).map(scan).collect()
    };

    let mut best = vec![None; totals.len()];
    for feature_best in per_feature {
        for (slot, candidate) in feature_best.into_iter().enumerate() {
            if let Some(c) = candidate {
                if best_is_beaten(&best[slot], &c) {
                    best[slot] = Some(c);
                }
            }
        }
    }
    best
}

fn best_is_beaten(incumbent: &Option<SplitCandidate>, challenger: &SplitCandidate) -> bool {
    match incumbent {
        None => true,
        Some(current) => challenger.gain > current.gain,
    }
}

fn consider(
    state: &mut ScanState,
    total: &SlotTotals,
    feature: usize,
    lo: f64,
    hi: f64,
    config: &TrainConfig,
) {
    let (g_left, h_left) = (state.g_left, state.h_left);
    let (g_right, h_right) = (total.g - g_left, total.h - h_left);
    if h_left < config.min_child_weight || h_right < config.min_child_weight {
        return;
    }
    let Ok(gain) = split_gain(
        g_left,
        h_left,
        g_right,
        h_right,
        config.lambda,
        config.gamma,
    ) else {
        return;
    };
    if gain.is_nan() || gain <= 0.0 {
        return;
    }
    let candidate = SplitCandidate {
        feature,
        threshold: split_threshold(lo, hi),
        gain,
    };
    if best_is_beaten(&state.best, &candidate) {
        state.best = Some(candidate);
    }
}

/// Exact greedy search for the single best split of `rows`.
///
/// Every boundary between distinct consecutive values of every feature is a
/// candidate; candidates leaving less than `min_child_weight` hessian on a
/// side are skipped. Returns `None` unless some candidate has positive gain.
/// `gh` is indexed by matrix row.
pub fn find_best_split(
    rows: &[usize],
    matrix: &FeatureMatrix,
    gh: &[GradHess],
    config: &TrainConfig,
) -> Option<SplitCandidate> {
    assert_eq!(gh.len(), matrix.n_rows(), "one GradHess per matrix row");
    let mut slot_of_row = vec![NO_SLOT; matrix.n_rows()];
    let mut total = SlotTotals::default();
    for &row in rows {
        slot_of_row[row] = 0;
        total.g += gh[row].g;
        total.h += gh[row].h;
    }
    let sorted = SortedColumns::new(matrix);
    best_splits(matrix, &sorted, gh, &slot_of_row, &[total], config)
        .pop()
        .flatten()
}
