use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{predictions} predictions for {truth} true values")]
    LengthMismatch { predictions: usize, truth: usize },
    #[error("no values to score")]
    Empty,
}

fn check(pred: &[f64], truth: &[f64]) -> Result<(), MetricError> {
    if pred.len() != truth.len() {
        return Err(MetricError::LengthMismatch {
            predictions: pred.len(),
            truth: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64, MetricError> {
    check(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / pred.len() as f64)
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64, MetricError> {
    mse(pred, truth).map(f64::sqrt)
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64, MetricError> {
    check(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / pred.len() as f64)
}

/// One model's scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model_name: String,
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
}

impl MetricsRow {
    pub fn score(model_name: &str, pred: &[f64], truth: &[f64]) -> Result<Self, MetricError> {
        let mse = mse(pred, truth)?;
        Ok(Self {
            model_name: model_name.to_string(),
            mse,
            rmse: mse.sqrt(),
            mae: mae(pred, truth)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 3.5355).abs() < 1e-4);
        assert_eq!(mae(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 3.5);
        assert_eq!(mae(&[7.0], &[7.0]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(mse(&[], &[]), Err(MetricError::Empty));
        assert_eq!(
            mae(&[1.0], &[1.0, 2.0]),
            Err(MetricError::LengthMismatch {
                predictions: 1,
                truth: 2
            })
        );
    }

    #[test]
    fn identities_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let n = rng.random_range(1..50);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
            let row = MetricsRow::score("m", &a, &b).unwrap();
            assert!((row.rmse * row.rmse - row.mse).abs() <= 1e-9 * row.mse);
            assert!(row.mae <= row.rmse + 1e-12);
            let same = MetricsRow::score("m", &a, &a).unwrap();
            assert_eq!((same.mse, same.rmse, same.mae), (0.0, 0.0, 0.0));
        }
    }
}
