use crate::matrix::FeatureMatrix;

use super::{Ensemble, ModelError};

/// First and second derivative of the per-sample loss at the current
/// prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradHess {
    pub g: f64,
    pub h: f64,
}

/// Derivatives of `½(prediction − target)²`.
#[inline]
pub fn grad_hess_squared(prediction: f64, target: f64) -> GradHess {
    GradHess {
        g: prediction - target,
        h: 1.0,
    }
}

/// Minimizer of `½(H + λ)w² + Gw`, i.e. `−G / (H + λ)`.
pub fn leaf_weight(sum_g: f64, sum_h: f64, lambda: f64) -> Result<f64, ModelError> {
    let denom = sum_h + lambda;
    if denom.is_nan() || denom <= 0.0 {
        return Err(ModelError::DegenerateLeaf { sum_h, lambda });
    }
    Ok(-sum_g / denom)
}

/// Reduction of the regularized objective from replacing one leaf by two,
/// net of the per-leaf penalty:
///
/// `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − (G_L+G_R)²/(H_L+H_R+λ)] − γ`
pub fn split_gain(
    g_left: f64,
    h_left: f64,
    g_right: f64,
    h_right: f64,
    lambda: f64,
    gamma: f64,
) -> Result<f64, ModelError> {
    let score = |g: f64, h: f64| -> Result<f64, ModelError> {
        let denom = h + lambda;
        if denom.is_nan() || denom <= 0.0 {
            return Err(ModelError::DegenerateLeaf { sum_h: h, lambda });
        }
        Ok(g * g / denom)
    };
    let left = score(g_left, h_left)?;
    let right = score(g_right, h_right)?;
    let parent = score(g_left + g_right, h_left + h_right)?;
    Ok(0.5 * (left + right - parent) - gamma)
}

/// Squared-error loss plus `γ·T + ½λ‖w‖²` for every tree, using the stored
/// (already shrunk) leaf weights.
pub fn objective_value(
    ensemble: &Ensemble,
    matrix: &FeatureMatrix,
    targets: &[f64],
    lambda: f64,
    gamma: f64,
) -> Result<f64, ModelError> {
    if targets.len() != matrix.n_rows() {
        return Err(ModelError::LengthMismatch {
            rows: matrix.n_rows(),
            targets: targets.len(),
        });
    }
    let predictions = ensemble.predict(matrix)?;
    let loss: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| 0.5 * (p - y) * (p - y))
        .sum();
    let penalty: f64 = ensemble
        .trees()
        .iter()
        .map(|tree| {
            let leaves = tree.leaf_weights();
            gamma * leaves.len() as f64 + 0.5 * lambda * leaves.iter().map(|w| w * w).sum::<f64>()
        })
        .sum();
    Ok(loss + penalty)
}
