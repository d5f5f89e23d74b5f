use crate::error::{Error, Result};

fn check(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::Config(format!(
            "{} targets but {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::UndefinedMetric("no samples".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if !(ss_tot > 0.0) {
        return Err(Error::UndefinedMetric(
            "target has zero variance".into(),
        ));
    }
    Ok(ss_tot)
}

fn sse(y: &[f64], yhat: &[f64]) -> f64 {
    y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum()
}

/// Coefficient of determination `1 - SSE / SST`.
pub fn r2(y: &[f64], yhat: &[f64]) -> Result<f64> {
    let ss_tot = check(y, yhat)?;
    Ok(1.0 - sse(y, yhat) / ss_tot)
}

/// RMSE divided by the population standard deviation of `y`.
pub fn nrmse_sigma(y: &[f64], yhat: &[f64]) -> Result<f64> {
    let ss_tot = check(y, yhat)?;
    Ok((sse(y, yhat) / ss_tot).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
        assert_eq!(nrmse_sigma(&y, &y).unwrap(), 0.0);
        assert_eq!(r2(&y, &[2.0; 3]).unwrap(), 0.0);
        assert_eq!(nrmse_sigma(&y, &[2.0; 3]).unwrap(), 1.0);
        assert_eq!(r2(&y, &[1.0, 2.0, 4.0]).unwrap(), 0.5);
        let y = [0.0, 0.0, 2.0, 2.0];
        let yhat = [0.0, 1.0, 1.0, 2.0];
        assert_eq!(r2(&y, &yhat).unwrap(), 0.5);
        assert_relative_eq!(nrmse_sigma(&y, &yhat).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn undefined_cases() {
        assert!(matches!(r2(&[1.0, 1.0], &[0.0, 2.0]), Err(Error::UndefinedMetric(_))));
        assert!(matches!(nrmse_sigma(&[], &[]), Err(Error::UndefinedMetric(_))));
        assert!(matches!(r2(&[1.0, 2.0], &[1.0]), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn agrees_with_naive_formulas(pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..50)) {
            let (y, yhat): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let n = y.len() as f64;
            let mean = y.iter().sum::<f64>() / n;
            let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            prop_assume!(var > 1e-9);
            let mse = y.iter().zip(&yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
            let got_r2 = r2(&y, &yhat).unwrap();
            let got_nrmse = nrmse_sigma(&y, &yhat).unwrap();
            prop_assert!((got_r2 - (1.0 - mse / var)).abs() <= 1e-12 * (1.0 + got_r2.abs()));
            prop_assert!((got_nrmse - (mse.sqrt() / var.sqrt())).abs() <= 1e-12 * (1.0 + got_nrmse));
        }
    }
}
