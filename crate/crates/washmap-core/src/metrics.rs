//! Regression evaluation metrics.

use crate::error::{Error, Result};
use crate::fx;

fn check_lengths(y_true: &[f64], y_pred: &[f64]) -> Result<()> {
    if y_true.is_empty() {
        return Err(Error::EmptyInput("metrics need at least one observation".into()));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::Validation(alloc::format!(
            "metric inputs differ in length: {} vs {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    Ok(())
}

/// Coefficient of determination, `1 - SS_res / SS_tot`.
pub fn r_squared(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let n = y_true.len() as f64;
    let mean: f64 = y_true.iter().sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        ss_res += (t - p) * (t - p);
        ss_tot += (t - mean) * (t - mean);
    }
    if ss_tot == 0.0 {
        return Err(Error::UndefinedMetric(
            "r_squared is undefined for a constant target".into(),
        ));
    }
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mean_squared_error(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let mut acc = 0.0;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        acc += (t - p) * (t - p);
    }
    Ok(acc / y_true.len() as f64)
}

pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    Ok(fx::sqrt(mean_squared_error(y_true, y_pred)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let y = [0.3, 0.5, 0.9];
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn mean_prediction_scores_zero() {
        let y = [0.0, 1.0, 2.0];
        let pred = [1.0, 1.0, 1.0];
        assert_eq!(r_squared(&y, &pred).unwrap(), 0.0);
    }

    #[test]
    fn half_explained_variance() {
        let y = [0.0, 1.0, 2.0];
        let pred = [0.0, 1.0, 1.0];
        assert_eq!(r_squared(&y, &pred).unwrap(), 0.5);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn rmse_squares_back_to_mse() {
        let y = [0.1, 0.9, 0.4, 0.7];
        let p = [0.2, 0.6, 0.4, 0.9];
        let r = rmse(&y, &p).unwrap();
        let m = mean_squared_error(&y, &p).unwrap();
        assert!((r * r - m).abs() < 1e-15);
    }

    #[test]
    fn r_squared_never_exceeds_one() {
        let mut rng = crate::rng::Rng::from_seed(12);
        for _ in 0..50 {
            let y: alloc::vec::Vec<f64> = (0..20).map(|_| rng.next_f64()).collect();
            let p: alloc::vec::Vec<f64> = (0..20).map(|_| rng.next_f64()).collect();
            assert!(r_squared(&y, &p).unwrap() <= 1.0);
        }
    }

    #[test]
    fn error_cases() {
        assert!(matches!(r_squared(&[], &[]), Err(Error::EmptyInput(_))));
        assert!(matches!(r_squared(&[1.0], &[1.0, 2.0]), Err(Error::Validation(_))));
        assert!(matches!(
            r_squared(&[0.5, 0.5], &[0.1, 0.9]),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(matches!(rmse(&[1.0], &[]), Err(Error::Validation(_))));
    }
}
