//! Forecast accuracy measures: sMAPE, MASE, the Naive2 reference and OWA.

use serde::{Deserialize, Serialize};

use crate::decompose::SeasonalAdjustment;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("actual has {actual} points but forecast has {forecast}")]
    LengthMismatch { actual: usize, forecast: usize },
    #[error("cannot score an empty forecast")]
    Empty,
    #[error("in-sample has {n} points; seasonal scaling with period {period} needs more")]
    InsufficientHistory { n: usize, period: usize },
    #[error("in-sample seasonal differences are all zero")]
    DegenerateScale,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("reference aggregate must be positive")]
    ZeroReference,
}

fn check_pair(actual: &[f64], forecast: &[f64]) -> Result<(), MetricError> {
    if actual.len() != forecast.len() {
        return Err(MetricError::LengthMismatch {
            actual: actual.len(),
            forecast: forecast.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

/// `(2/h) * sum |Y - F| / |Y + F| * 100`.
///
/// A term with `Y = F = 0` contributes 0. The result lies in `[0, 200]` for
/// non-negative data; for sign-changing data the `|Y + F|` denominator is
/// unbounded (see [`smape_abs`]).
pub fn smape(actual: &[f64], forecast: &[f64]) -> Result<f64, MetricError> {
    check_pair(actual, forecast)?;
    let h = actual.len() as f64;
    let sum: f64 = actual
        .iter()
        .zip(forecast)
        .map(|(&y, &f)| {
            let num = (y - f).abs();
            if num == 0.0 {
                0.0
            } else {
                num / (y + f).abs()
            }
        })
        .sum();
    Ok(200.0 * sum / h)
}

/// sMAPE with the `|Y| + |F|` denominator. Coincides with [`smape`] for
/// non-negative data and stays within `[0, 200]` for signed data.
pub fn smape_abs(actual: &[f64], forecast: &[f64]) -> Result<f64, MetricError> {
    check_pair(actual, forecast)?;
    let h = actual.len() as f64;
    let sum: f64 = actual
        .iter()
        .zip(forecast)
        .map(|(&y, &f)| {
            let num = (y - f).abs();
            if num == 0.0 {
                0.0
            } else {
                num / (y.abs() + f.abs())
            }
        })
        .sum();
    Ok(200.0 * sum / h)
}

pub fn mae(actual: &[f64], forecast: &[f64]) -> Result<f64, MetricError> {
    check_pair(actual, forecast)?;
    Ok(actual.iter().zip(forecast).map(|(y, f)| (y - f).abs()).sum::<f64>() / actual.len() as f64)
}

/// Mean absolute in-sample seasonal-naive error,
/// `1/(n-m) * sum_{t=m+1..n} |Y_t - Y_{t-m}|`.
pub fn seasonal_scale(insample: &[f64], period: usize) -> Result<f64, MetricError> {
    let n = insample.len();
    if period == 0 || n <= period {
        return Err(MetricError::InsufficientHistory { n, period });
    }
    let scale = (period..n)
        .map(|t| (insample[t] - insample[t - period]).abs())
        .sum::<f64>()
        / (n - period) as f64;
    if !scale.is_finite() {
        return Err(MetricError::NonFinite);
    }
    if scale == 0.0 {
        return Err(MetricError::DegenerateScale);
    }
    Ok(scale)
}

/// Seasonal scale over the pairs `(t - m, t)` that are both observed.
pub fn masked_seasonal_scale(values: &[f64], mask: &[bool], period: usize) -> Result<f64, MetricError> {
    let n = values.len();
    if period == 0 || n <= period {
        return Err(MetricError::InsufficientHistory { n, period });
    }
    let (sum, count) = (period..n)
        .filter(|&t| mask[t] && mask[t - period])
        .fold((0.0, 0usize), |(s, c), t| (s + (values[t] - values[t - period]).abs(), c + 1));
    if count == 0 {
        return Err(MetricError::InsufficientHistory { n, period });
    }
    if sum == 0.0 {
        return Err(MetricError::DegenerateScale);
    }
    Ok(sum / count as f64)
}

/// Mean absolute error scaled by the in-sample seasonal-naive error.
pub fn mase(actual: &[f64], forecast: &[f64], insample: &[f64], period: usize) -> Result<f64, MetricError> {
    check_pair(actual, forecast)?;
    let scale = seasonal_scale(insample, period)?;
    Ok(mae(actual, forecast)? / scale)
}

/// M4 Naive2: last-value naive on the seasonally adjusted series when the
/// lag-`period` autocorrelation test flags seasonality (multiplicative
/// classical decomposition), plain naive otherwise.
pub fn naive2(insample: &[f64], period: usize, horizon: usize) -> Result<Vec<f64>, MetricError> {
    if insample.is_empty() || horizon == 0 {
        return Err(MetricError::Empty);
    }
    if insample.iter().any(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let adj = SeasonalAdjustment::detect(insample, period);
    let last = *adj.adjusted.last().expect("non-empty");
    let mut out = vec![last; horizon];
    adj.reseasonalize(&mut out);
    Ok(out)
}

/// Aggregate accuracy of a method against the Naive2 reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OwaReport {
    pub smape_method: f64,
    pub mase_method: f64,
    pub smape_naive2: f64,
    pub mase_naive2: f64,
    pub owa: f64,
}

/// `OWA = (sMAPE / sMAPE_naive2 + MASE / MASE_naive2) / 2` on aggregates.
pub fn owa(
    smape_method: f64,
    mase_method: f64,
    smape_naive2: f64,
    mase_naive2: f64,
) -> Result<OwaReport, MetricError> {
    if !(smape_naive2 > 0.0 && mase_naive2 > 0.0) {
        return Err(MetricError::ZeroReference);
    }
    let owa = 0.5 * (smape_method / smape_naive2 + mase_method / mase_naive2);
    if !owa.is_finite() {
        return Err(MetricError::NonFinite);
    }
    Ok(OwaReport {
        smape_method,
        mase_method,
        smape_naive2,
        mase_naive2,
        owa,
    })
}
