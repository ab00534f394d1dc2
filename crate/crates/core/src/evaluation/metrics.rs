use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("length mismatch: {0} observations vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("zero variance makes the metric undefined")]
    ZeroVariance,
}

fn check(y: &[f64], yhat: &[f64], min: usize) -> Result<(), MetricError> {
    if y.len() != yhat.len() {
        return Err(MetricError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.len() < min {
        return Err(MetricError::TooShort { needed: min, got: y.len() });
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Exact equality; a computed mean need not reproduce a repeated value.
fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| *x == v[0])
}

/// Sample Pearson correlation coefficient.
pub fn pearson_r(y: &[f64], yhat: &[f64]) -> Result<f64, MetricError> {
    check(y, yhat, 2)?;
    if is_constant(y) || is_constant(yhat) {
        return Err(MetricError::ZeroVariance);
    }
    let (my, mp) = (mean(y), mean(yhat));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(yhat) {
        let (da, db) = (a - my, b - mp);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Coefficient of determination `1 - SS_res / SS_tot`; negative for fits worse than the mean.
pub fn r_squared(y: &[f64], yhat: &[f64]) -> Result<f64, MetricError> {
    check(y, yhat, 2)?;
    if is_constant(y) {
        return Err(MetricError::ZeroVariance);
    }
    let my = mean(y);
    let ss_tot: f64 = y.iter().map(|a| (a - my).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(MetricError::ZeroVariance);
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64, MetricError> {
    check(y, yhat, 1)?;
    let mse = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64;
    Ok(mse.sqrt())
}

pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64, MetricError> {
    check(y, yhat, 1)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

/// Symmetric MAPE in percent, `100 * mean(2|yhat - y| / (|y| + |yhat|))`, in `[0, 200]`.
/// Pairs with a zero denominator contribute 0.
pub fn smape(y: &[f64], yhat: &[f64]) -> Result<f64, MetricError> {
    check(y, yhat, 1)?;
    let total: f64 = y
        .iter()
        .zip(yhat)
        .map(|(a, b)| {
            let den = a.abs() + b.abs();
            if den == 0.0 {
                0.0
            } else {
                2.0 * (b - a).abs() / den
            }
        })
        .sum();
    Ok(100.0 * total / y.len() as f64)
}
