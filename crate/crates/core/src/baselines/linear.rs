use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::boost::{check_layout, check_training_data, mean, ModelError};
use crate::matrix::FeatureMatrix;

/// `ŷ = x · weights + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub feature_layout: Vec<String>,
}

impl LinearModel {
    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        predict_linear(self, matrix)
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        row.iter()
            .zip(&self.weights)
            .fold(self.intercept, |acc, (x, w)| acc + x * w)
    }
}

pub fn predict_linear(model: &LinearModel, matrix: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
    check_layout(&model.feature_layout, matrix)?;
    Ok(matrix.rows().map(|row| model.predict_row(row)).collect())
}

/// Column means and the column-centred design.
struct Centered {
    x: DMatrix<f64>,
    y: DVector<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
}

fn center(matrix: &FeatureMatrix, targets: &[f64]) -> Centered {
    let (n, p) = (matrix.n_rows(), matrix.n_cols());
    let x_mean: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|i| matrix.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let y_mean = mean(targets);
    let x = DMatrix::from_fn(n, p, |i, j| matrix.get(i, j) - x_mean[j]);
    let y = DVector::from_iterator(n, targets.iter().map(|t| t - y_mean));
    Centered {
        x,
        y,
        x_mean,
        y_mean,
    }
}

fn assemble(weights: DVector<f64>, c: &Centered, matrix: &FeatureMatrix) -> LinearModel {
    let weights: Vec<f64> = weights.iter().copied().collect();
    let shift: f64 = weights.iter().zip(&c.x_mean).map(|(w, m)| w * m).sum();
    LinearModel {
        intercept: c.y_mean - shift,
        weights,
        feature_layout: matrix.columns().to_vec(),
    }
}

/// Ordinary least squares with an implicit, unpenalized intercept.
///
/// Solved through the SVD of the centred design; singular values below
/// `max(n, p) · σ_max · ε` are dropped, which yields the minimum-norm weights
/// when columns are collinear (as one-hot blocks are).
pub fn fit_ols(matrix: &FeatureMatrix, targets: &[f64]) -> Result<LinearModel, ModelError> {
    check_training_data(matrix, targets)?;
    let c = center(matrix, targets);
    if matrix.n_cols() == 0 {
        return Ok(assemble(DVector::zeros(0), &c, matrix));
    }
    let svd = c.x.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let tol = matrix.n_rows().max(matrix.n_cols()) as f64 * sigma_max * f64::EPSILON;
    let weights = svd
        .solve(&c.y, tol)
        .map_err(|e| ModelError::InvalidConfig(format!("least squares solve failed: {e}")))?;
    Ok(assemble(weights, &c, matrix))
}

/// Posterior mean of Bayesian linear regression with an isotropic Gaussian
/// prior of precision `alpha` on the weights: `(XᵀX + αI)⁻¹Xᵀy` on the
/// centred design, so the intercept is not shrunk.
pub fn fit_bayes_ridge(
    matrix: &FeatureMatrix,
    targets: &[f64],
    alpha: f64,
) -> Result<LinearModel, ModelError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ModelError::InvalidConfig(format!(
            "prior precision must be positive, got {alpha}"
        )));
    }
    check_training_data(matrix, targets)?;
    let c = center(matrix, targets);
    let p = matrix.n_cols();
    let gram = c.x.transpose() * &c.x + DMatrix::identity(p, p) * alpha;
    let rhs = c.x.transpose() * &c.y;
    let weights = gram
        .cholesky()
        .ok_or_else(|| {
            ModelError::InvalidConfig("posterior precision is not positive definite".into())
        })?
        .solve(&rhs);
    Ok(assemble(weights, &c, matrix))
}
