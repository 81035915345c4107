//! Linear ε-insensitive support vector regression trained by stochastic
//! subgradient descent.
//!
//! Features and targets are standardized internally. With `s` the target
//! standard deviation, the raw objective `½‖v‖²/C + Σ max(0, |ŷ−y| − ε)`
//! (`v` being the weights on standardized features) equals `s` times the
//! same objective on standardized targets with `C/s` and `ε/s`, so both
//! share a minimizer and step sizes need no tuning per target scale.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::LinearModel;
use crate::boost::{check_training_data, mean, ModelError};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrConfig {
    /// Half-width of the insensitive tube, in target units.
    pub epsilon: f64,
    /// Inverse regularization strength.
    pub c: f64,
    /// Initial step size on the standardized problem.
    pub learning_rate: f64,
    /// Step at update `t` is `learning_rate / (1 + decay·t)`.
    pub decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for SvrConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            c: 1.0,
            learning_rate: 0.05,
            decay: 0.01,
            epochs: 50,
            batch_size: 32,
            seed: 7,
        }
    }
}

impl SvrConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |msg: &str| Err(ModelError::InvalidConfig(msg.to_string()));
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return fail("epsilon must be finite and >= 0");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return fail("c must be finite and > 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be finite and > 0");
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return fail("decay must be finite and >= 0");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be >= 1");
        }
        Ok(())
    }
}

/// Population mean and standard deviation per column; a zero deviation is
/// replaced by 1 so constant columns pass through unscaled.
fn column_scales(matrix: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = matrix.n_rows() as f64;
    (0..matrix.n_cols())
        .map(|j| {
            let m = (0..matrix.n_rows()).map(|i| matrix.get(i, j)).sum::<f64>() / n;
            let var = (0..matrix.n_rows())
                .map(|i| (matrix.get(i, j) - m).powi(2))
                .sum::<f64>()
                / n;
            (m, if var > 0.0 { var.sqrt() } else { 1.0 })
        })
        .unzip()
}

fn target_scale(targets: &[f64]) -> f64 {
    let m = mean(targets);
    let var = targets.iter().map(|t| (t - m).powi(2)).sum::<f64>() / targets.len() as f64;
    if var > 0.0 {
        var.sqrt()
    } else {
        1.0
    }
}

/// `½‖v‖²/C + Σ max(0, |ŷ−y| − ε)` for a fitted model, where `v` are the
/// model's weights expressed on standardized columns of `matrix`.
pub fn svr_objective(
    model: &LinearModel,
    matrix: &FeatureMatrix,
    targets: &[f64],
    config: &SvrConfig,
) -> Result<f64, ModelError> {
    let predictions = model.predict(matrix)?;
    let (_, sd) = column_scales(matrix);
    let reg: f64 = model
        .weights
        .iter()
        .zip(&sd)
        .map(|(w, s)| (w * s).powi(2))
        .sum::<f64>()
        * 0.5
        / config.c;
    let hinge: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| ((p - y).abs() - config.epsilon).max(0.0))
        .sum();
    Ok(reg + hinge)
}

pub fn fit_linear_svr(
    matrix: &FeatureMatrix,
    targets: &[f64],
    config: &SvrConfig,
) -> Result<LinearModel, ModelError> {
    fit_linear_svr_with_callback(matrix, targets, config, |_, _| {})
}

/// Like [`fit_linear_svr`], calling `on_epoch(e, model)` with the model as
/// it stands after each epoch.
pub fn fit_linear_svr_with_callback(
    matrix: &FeatureMatrix,
    targets: &[f64],
    config: &SvrConfig,
    mut on_epoch: impl FnMut(usize, &LinearModel),
) -> Result<LinearModel, ModelError> {
    config.validate()?;
    check_training_data(matrix, targets)?;
    let (n, p) = (matrix.n_rows(), matrix.n_cols());
    let (x_mean, x_sd) = column_scales(matrix);
    let y_mean = mean(targets);
    let y_sd = target_scale(targets);

    let z: Vec<f64> = (0..n)
        .flat_map(|i| (0..p).map(move |j| (i, j)))
        .map(|(i, j)| (matrix.get(i, j) - x_mean[j]) / x_sd[j])
        .collect();
    let y: Vec<f64> = targets.iter().map(|t| (t - y_mean) / y_sd).collect();
    let eps = config.epsilon / y_sd;
    // the penalty's curvature per row on the standardized problem
    let shrink = y_sd / (config.c * n as f64);

    // start from the zero predictor in raw units
    let mut v = vec![0.0; p];
    let mut b = -y_mean / y_sd;

    let to_raw = |v: &[f64], b: f64| -> LinearModel {
        let weights: Vec<f64> = v.iter().zip(&x_sd).map(|(v, s)| y_sd * v / s).collect();
        let shift: f64 = weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum();
        LinearModel {
            intercept: y_mean + y_sd * b - shift,
            weights,
            feature_layout: matrix.columns().to_vec(),
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; p];
    let mut t = 0usize;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let step = config.learning_rate / (1.0 + config.decay * t as f64);
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for &i in batch {
                let row = &z[i * p..(i + 1) * p];
                let residual = row.iter().zip(&v).map(|(a, w)| a * w).sum::<f64>() + b - y[i];
                if residual.abs() > eps {
                    let s = residual.signum();
                    grad.iter_mut().zip(row).for_each(|(g, a)| *g += s * a);
                    grad_b += s;
                }
            }
            let scale = step / batch.len() as f64;
            // proximal step on the quadratic penalty keeps large targets stable
            let prox = 1.0 + step * shrink;
            for (w, g) in v.iter_mut().zip(&grad) {
                *w = (*w - scale * g) / prox;
            }
            b -= scale * grad_b;
            t += 1;
        }
        on_epoch(epoch, &to_raw(&v, b));
    }
    Ok(to_raw(&v, b))
}
