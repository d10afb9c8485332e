//! Benchmark methods without fitted parameters.

use super::{ForecastError, Forecaster};

/// Historical mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mean;

impl Forecaster for Mean {
    fn name(&self) -> &str {
        "mean"
    }

    fn min_history(&self, _period: usize) -> usize {
        1
    }

    fn forecast(&self, history: &[f64], _period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        let mean = history.iter().sum::<f64>() / history.len() as f64;
        Ok(vec![mean; horizon])
    }
}

/// Last observation carried forward.
#[derive(Debug, Clone, Copy, Default)]
pub struct Naive;

impl Forecaster for Naive {
    fn name(&self) -> &str {
        "naive"
    }

    fn min_history(&self, _period: usize) -> usize {
        1
    }

    fn forecast(&self, history: &[f64], _period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        Ok(vec![history[history.len() - 1]; horizon])
    }
}

/// Last observed season repeated.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeasonalNaive;

impl Forecaster for SeasonalNaive {
    fn name(&self) -> &str {
        "snaive"
    }

    fn min_history(&self, period: usize) -> usize {
        period.max(1)
    }

    fn forecast(&self, history: &[f64], period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        let m = period.max(1);
        let n = history.len();
        Ok((0..horizon).map(|j| history[n - m + j % m]).collect())
    }
}

/// Random walk with drift: the line through the first and last points.
#[derive(Debug, Clone, Copy, Default)]
pub struct Drift;

impl Forecaster for Drift {
    fn name(&self) -> &str {
        "drift"
    }

    fn min_history(&self, _period: usize) -> usize {
        2
    }

    fn forecast(&self, history: &[f64], _period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        let n = history.len();
        let last = history[n - 1];
        let slope = (last - history[0]) / (n - 1) as f64;
        Ok((1..=horizon).map(|j| last + slope * j as f64).collect())
    }
}
