//! The classical Theta method: equal-weight combination of the extrapolated
//! linear trend (theta = 0 line) and simple exponential smoothing of the
//! theta = 2 line, applied to the seasonally adjusted series.

use super::smoothing::ses_level;
use super::{linear_fit, ForecastError, Forecaster};
use crate::decompose::SeasonalAdjustment;

#[derive(Debug, Clone, Copy, Default)]
pub struct Theta;

impl Forecaster for Theta {
    fn name(&self) -> &str {
        "theta"
    }

    fn min_history(&self, _period: usize) -> usize {
        3
    }

    fn forecast(&self, history: &[f64], period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        let adjustment = SeasonalAdjustment::detect(history, period);
        let y = &adjustment.adjusted;
        let n = y.len();
        let (a, b) = linear_fit(y);
        let theta2: Vec<f64> = y.iter().enumerate().map(|(t, v)| 2.0 * v - (a + b * t as f64)).collect();
        let level = ses_level(&theta2);
        let mut out: Vec<f64> = (0..horizon)
            .map(|j| 0.5 * (a + b * (n + j) as f64) + 0.5 * level)
            .collect();
        adjustment.reseasonalize(&mut out);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecasters::fit_predict;

    #[test]
    fn follows_half_the_trend_from_the_last_level() {
        let h: Vec<f64> = (0..40).map(|t| 10.0 + t as f64).collect();
        let f = fit_predict(&Theta, &h, 1, 2).unwrap();
        // The trend line is exact, so the theta-2 line equals the data and
        // SES ends near the last value.
        assert!(f[1] > f[0]);
        assert!((f[0] - 0.5 * (50.0 + 49.0)).abs() < 1.0, "{f:?}");
    }

    #[test]
    fn seasonal_series_is_reseasonalized() {
        let pattern = [1.3, 0.8, 1.1, 0.8];
        let h: Vec<f64> = (0..48).map(|t| 100.0 * pattern[t % 4]).collect();
        let f = fit_predict(&Theta, &h, 4, 4).unwrap();
        for (j, v) in f.iter().enumerate() {
            assert!((v - 100.0 * pattern[(48 + j) % 4]).abs() < 1.0, "{f:?}");
        }
    }
}
