use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;

use super::objective::{leaf_weight, GradHess};
use super::split::{best_splits, SlotTotals, SortedColumns, NO_SLOT};
use super::{ModelError, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] < threshold` go to `left`, the rest to `right`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

/// Binary regression tree stored as a node arena rooted at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    /// No structural checks; see [`RegressionTree::validate`].
    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_weights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { weight } => Some(*weight),
                Node::Split { .. } => None,
            })
            .collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] < threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { weight } => weight,
            Node::Split { .. } => unreachable!("leaf_index stops at leaves"),
        }
    }

    /// Checks that the nodes form a proper binary tree rooted at 0, that
    /// every feature index is below `n_features` and every number is finite.
    /// Errors name the offending node.
    pub fn validate(&self, n_features: usize) -> Result<(), (usize, String)> {
        if self.nodes.is_empty() {
            return Err((0, "tree has no nodes".into()));
        }
        let mut visited = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(at) = stack.pop() {
            if visited[at] {
                return Err((at, "node reached twice (cycle or shared child)".into()));
            }
            visited[at] = true;
            match self.nodes[at] {
                Node::Leaf { weight } if !weight.is_finite() => {
                    return Err((at, "non-finite leaf weight".into()))
                }
                Node::Leaf { .. } => {}
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return Err((
                            at,
                            format!("feature index {feature} outside layout of {n_features}"),
                        ));
                    }
                    if !threshold.is_finite() {
                        return Err((at, "non-finite threshold".into()));
                    }
                    for child in [left, right] {
                        if child >= self.nodes.len() {
                            return Err((at, format!("child index {child} out of range")));
                        }
                        stack.push(child);
                    }
                }
            }
        }
        match visited.iter().position(|v| !v) {
            Some(orphan) => Err((orphan, "node unreachable from root".into())),
            None => Ok(()),
        }
    }
}

/// Grows one tree on `rows` (indices into `matrix` and `gh`).
///
/// Nodes at depth `max_depth`, or without a positive-gain split, become
/// leaves with weight `η · −G/(H + λ)`.
pub fn grow_tree(
    rows: &[usize],
    matrix: &FeatureMatrix,
    gh: &[GradHess],
    config: &TrainConfig,
) -> Result<RegressionTree, ModelError> {
    if rows.is_empty() {
        return Err(ModelError::EmptyData);
    }
    if gh.len() != matrix.n_rows() {
        return Err(ModelError::LengthMismatch {
            rows: matrix.n_rows(),
            targets: gh.len(),
        });
    }
    let mut slot_of_row = vec![NO_SLOT; matrix.n_rows()];
    for &row in rows {
        slot_of_row[row] = 0;
    }
    let sorted = SortedColumns::new(matrix);
    grow_level_wise(matrix, &sorted, gh, slot_of_row, config).map(|(tree, _)| tree)
}

/// Level-by-level growth; each level is one pass over the pre-sorted
/// columns. Returns the tree and, for every row, the arena index of the leaf
/// it landed in (`NO_SLOT` for rows not in the tree).
pub(crate) fn grow_level_wise(
    matrix: &FeatureMatrix,
    sorted: &SortedColumns,
    gh: &[GradHess],
    mut slot_of_row: Vec<u32>,
    config: &TrainConfig,
) -> Result<(RegressionTree, Vec<u32>), ModelError> {
    let mut leaf_of_row = vec![NO_SLOT; slot_of_row.len()];
    // arena index of the node each frontier slot stands for
    let mut frontier: Vec<usize> = vec![0];
    let mut nodes = vec![Node::Leaf { weight: 0.0 }];
    let mut depth = 0;

    while !frontier.is_empty() {
        let mut totals = vec![SlotTotals::default(); frontier.len()];
        for (row, &slot) in slot_of_row.iter().enumerate() {
            if slot != NO_SLOT {
                totals[slot as usize].g += gh[row].g;
                totals[slot as usize].h += gh[row].h;
            }
        }

        let splits = if depth < config.max_depth {
            best_splits(matrix, sorted, gh, &slot_of_row, &totals, config)
        } else {
            vec![None; frontier.len()]
        };

        // children of slot s become slots next_slot[s] and next_slot[s] + 1
        let mut next_frontier = Vec::new();
        let mut next_slot = vec![NO_SLOT; frontier.len()];
        for (slot, (&node, split)) in frontier.iter().zip(&splits).enumerate() {
            match split {
                Some(split) => {
                    let left = nodes.len();
                    nodes.push(Node::Leaf { weight: 0.0 });
                    nodes.push(Node::Leaf { weight: 0.0 });
                    nodes[node] = Node::Split {
                        feature: split.feature,
                        threshold: split.threshold,
                        left,
                        right: left + 1,
                    };
                    next_slot[slot] = next_frontier.len() as u32;
                    next_frontier.push(left);
                    next_frontier.push(left + 1);
                }
                None => {
                    let total = totals[slot];
                    let weight =
                        config.learning_rate * leaf_weight(total.g, total.h, config.lambda)?;
                    nodes[node] = Node::Leaf { weight };
                }
            }
        }

        for (row, slot) in slot_of_row.iter_mut().enumerate() {
            if *slot == NO_SLOT {
                continue;
            }
            let s = *slot as usize;
            match &splits[s] {
                Some(split) => {
                    let go_left = matrix.get(row, split.feature) < split.threshold;
                    *slot = next_slot[s] + u32::from(!go_left);
                }
                None => {
                    leaf_of_row[row] = frontier[s] as u32;
                    *slot = NO_SLOT;
                }
            }
        }
        frontier = next_frontier;
        depth += 1;
    }
    Ok((RegressionTree { nodes }, leaf_of_row))
}
