//! Classic first-order gradient boosting: each tree is a least-squares
//! regression tree fitted to the current residuals, with no hessian
//! weighting and no leaf or weight penalties.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::{
    check_training_data, mean, split_threshold, Ensemble, ModelError, Node, RegressionTree,
};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbdtBaselineConfig {
    pub n_trees: usize,
    pub learning_rate: f64,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for GbdtBaselineConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            learning_rate: 0.1,
            max_depth: Some(3),
            min_samples_leaf: 1,
        }
    }
}

impl GbdtBaselineConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |msg: &str| Err(ModelError::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return fail("learning_rate must lie in (0, 1]");
        }
        if self.max_depth == Some(0) {
            return fail("max_depth must be >= 1");
        }
        if self.min_samples_leaf < 1 {
            return fail("min_samples_leaf must be >= 1");
        }
        Ok(())
    }
}

pub fn fit_gbdt_first_order(
    matrix: &FeatureMatrix,
    targets: &[f64],
    config: &GbdtBaselineConfig,
) -> Result<Ensemble, ModelError> {
    fit_gbdt_with_callback(matrix, targets, config, |_, _| {})
}

/// Like [`fit_gbdt_first_order`], calling `on_round(k, predictions)` after
/// each tree is added.
pub fn fit_gbdt_with_callback(
    matrix: &FeatureMatrix,
    targets: &[f64],
    config: &GbdtBaselineConfig,
    mut on_round: impl FnMut(usize, &[f64]),
) -> Result<Ensemble, ModelError> {
    config.validate()?;
    check_training_data(matrix, targets)?;
    let base = mean(targets);
    let mut predictions = vec![base; targets.len()];

    let sorted: Vec<Vec<u32>> = (0..matrix.n_cols())
        .into_par_iter()
        .map(|j| {
            let mut order: Vec<u32> = (0..matrix.n_rows() as u32).collect();
            order.sort_by(|&a, &b| {
                matrix
                    .get(a as usize, j)
                    .total_cmp(&matrix.get(b as usize, j))
                    .then(a.cmp(&b))
            });
            order
        })
        .collect();

    let mut trees = Vec::with_capacity(config.n_trees);
    for round in 0..config.n_trees {
        let residuals: Vec<f64> = targets
            .iter()
            .zip(&predictions)
            .map(|(y, p)| y - p)
            .collect();
        let mut builder = TreeBuilder {
            matrix,
            residuals: &residuals,
            config,
            nodes: Vec::new(),
        };
        builder.build(sorted.clone(), 0);
        let tree = RegressionTree::from_nodes(builder.nodes);
        for (i, p) in predictions.iter_mut().enumerate() {
            *p += tree.predict_row(matrix.row(i));
        }
        trees.push(tree);
        on_round(round, &predictions);
    }
    Ok(Ensemble::new(
        trees,
        base,
        config.learning_rate,
        matrix.columns().to_vec(),
    ))
}

struct TreeBuilder<'a> {
    matrix: &'a FeatureMatrix,
    residuals: &'a [f64],
    config: &'a GbdtBaselineConfig,
    nodes: Vec<Node>,
}

struct Cut {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl TreeBuilder<'_> {
    /// `lists[j]` holds the node's rows ordered by feature `j`. Returns the
    /// index of the node created.
    fn build(&mut self, lists: Vec<Vec<u32>>, depth: usize) -> usize {
        let index = self.nodes.len();
        let rows: &[u32] = lists.first().map_or(&[], Vec::as_slice);
        let sum: f64 = rows.iter().map(|&r| self.residuals[r as usize]).sum();
        let n = rows.len();
        let leaf = Node::Leaf {
            weight: self.config.learning_rate * sum / n as f64,
        };
        self.nodes.push(leaf);

        let depth_left = self.config.max_depth.is_none_or(|d| depth < d);
        if !depth_left || n < 2 * self.config.min_samples_leaf || self.is_pure(rows) {
            return index;
        }
        let Some(cut) = self.best_cut(&lists, sum) else {
            return index;
        };

        let goes_left = |r: u32| self.matrix.get(r as usize, cut.feature) < cut.threshold;
        let (left, right): (Vec<Vec<u32>>, Vec<Vec<u32>>) = lists
            .into_iter()
            .map(|list| list.into_iter().partition(|&r| goes_left(r)))
            .unzip();
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        self.nodes[index] = Node::Split {
            feature: cut.feature,
            threshold: cut.threshold,
            left: l,
            right: r,
        };
        index
    }

    fn is_pure(&self, rows: &[u32]) -> bool {
        let first = self.residuals[rows[0] as usize];
        rows.iter().all(|&r| self.residuals[r as usize] == first)
    }

    /// Largest reduction in squared error, `S_L²/n_L + S_R²/n_R − S²/n`,
    /// over all boundaries between distinct values. Ties keep the lower
    /// feature, then the lower threshold.
    fn best_cut(&self, lists: &[Vec<u32>], sum: f64) -> Option<Cut> {
        let n = lists[0].len();
        let parent = sum * sum / n as f64;
        let min_leaf = self.config.min_samples_leaf;
        let scan = |(feature, list): (usize, &Vec<u32>)| -> Option<Cut> {
            let mut best: Option<Cut> = None;
            let mut s_left = 0.0;
            for k in 0..n - 1 {
                let row = list[k] as usize;
                s_left += self.residuals[row];
                let n_left = k + 1;
                if n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let lo = self.matrix.get(row, feature);
                let hi = self.matrix.get(list[k + 1] as usize, feature);
                if lo == hi {
                    continue;
                }
                let s_right = sum - s_left;
                let gain = s_left * s_left / n_left as f64
                    + s_right * s_right / (n - n_left) as f64
                    - parent;
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Cut {
                        feature,
                        threshold: split_threshold(lo, hi),
                        gain,
                    });
                }
            }
            best
        };
        let per_feature: Vec<Option<Cut>> = if n * lists.len() >= 1 << 14 {
            lists.par_iter().enumerate().map(scan).collect()
        } else {
            lists.iter().enumerate().map(scan).collect()
        };
        per_feature
            .into_iter()
            .flatten()
            .fold(None, |best, cut| match best {
                Some(b) if b.gain >= cut.gain => Some(b),
                _ => Some(cut),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fixture(n: usize, p: usize, seed: u64) -> (FeatureMatrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let y = rows
            .iter()
            .map(|r| r[0].sin() * 3.0 + r[1] * r[1] + rng.random_range(-1.0..1.0))
            .collect();
        (FeatureMatrix::from_rows(&rows, p).unwrap(), y)
    }

    fn mse(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
    }

    #[test]
    fn single_unlimited_tree_interpolates() {
        let (m, y) = random_fixture(40, 3, 4);
        let config = GbdtBaselineConfig {
            n_trees: 1,
            learning_rate: 1.0,
            max_depth: None,
            min_samples_leaf: 1,
        };
        let model = fit_gbdt_first_order(&m, &y, &config).unwrap();
        assert!(mse(&model.predict(&m).unwrap(), &y) < 1e-9);
    }

    #[test]
    fn constant_targets_give_single_leaves() {
        let (m, _) = random_fixture(20, 2, 1);
        let y = vec![4.25; 20];
        let model = fit_gbdt_first_order(&m, &y, &GbdtBaselineConfig::default()).unwrap();
        assert!(model.trees().iter().all(|t| t.n_leaves() == 1));
        for p in model.predict(&m).unwrap() {
            assert!((p - 4.25).abs() < 1e-12);
        }
    }

    #[test]
    fn training_mse_never_increases() {
        let (m, y) = random_fixture(80, 3, 8);
        for eta in [0.1, 0.5, 1.0] {
            let config = GbdtBaselineConfig {
                n_trees: 30,
                learning_rate: eta,
                ..Default::default()
            };
            let mut trace = vec![mse(&vec![mean(&y); y.len()], &y)];
            fit_gbdt_with_callback(&m, &y, &config, |_, p| trace.push(mse(p, &y))).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "eta={eta}: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn depth_and_leaf_size_are_respected() {
        let (m, y) = random_fixture(60, 3, 2);
        let config = GbdtBaselineConfig {
            n_trees: 5,
            max_depth: Some(2),
            min_samples_leaf: 7,
            ..Default::default()
        };
        let model = fit_gbdt_first_order(&m, &y, &config).unwrap();
        for tree in model.trees() {
            assert!(tree.depth() <= 2);
            let mut counts = vec![0usize; tree.nodes().len()];
            for row in m.rows() {
                counts[tree.leaf_index(row)] += 1;
            }
            for (i, node) in tree.nodes().iter().enumerate() {
                if matches!(node, Node::Leaf { .. }) {
                    assert!(counts[i] >= 7);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_config_and_empty_data() {
        let (m, y) = random_fixture(10, 2, 3);
        let bad = GbdtBaselineConfig {
            learning_rate: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            fit_gbdt_first_order(&m, &y, &bad),
            Err(ModelError::InvalidConfig(_))
        ));
        let empty = FeatureMatrix::new(0, 2, vec![], vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(
            fit_gbdt_first_order(&empty, &[], &GbdtBaselineConfig::default()),
            Err(ModelError::EmptyData)
        );
    }
}
