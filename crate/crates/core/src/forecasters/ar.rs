//! Autoregression with intercept, order chosen by AICc.

use super::{ForecastError, Forecaster};
use crate::linalg::solve_spd;

/// Least-squares AR(p) fit `y_t = c + Σ φ_i y_{t-i} + e_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Residual sum of squares over the fitting sample.
    pub sse: f64,
    /// Number of residuals in the fitting sample.
    pub n_obs: usize,
}

impl ArFit {
    /// Recursive multi-step forecast continuing `history`.
    pub fn forecast(&self, history: &[f64], horizon: usize) -> Vec<f64> {
        let p = self.coefficients.len();
        let mut buf: Vec<f64> = history[history.len() - p..].to_vec();
        for _ in 0..horizon {
            let n = buf.len();
            let next = self.intercept
                + self
                    .coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * buf[n - 1 - i])
                    .sum::<f64>();
            buf.push(next);
        }
        buf.split_off(p)
    }

    /// Small-sample corrected Akaike criterion. Counts the intercept, the
    /// coefficients and the noise variance.
    pub fn aicc(&self) -> f64 {
        let n = self.n_obs as f64;
        let k = (self.coefficients.len() + 2) as f64;
        if n - k - 1.0 <= 0.0 {
            return f64::INFINITY;
        }
        n * (self.sse / n).ln() + 2.0 * k + 2.0 * k * (k + 1.0) / (n - k - 1.0)
    }
}

/// Fits AR(`p`) on residual indices `start..n` (`start >= p`). Returns
/// `None` when the lagged design is singular.
fn fit_on_sample(history: &[f64], p: usize, start: usize) -> Option<ArFit> {
    let n = history.len();
    let m = n - start;
    let y = &history[start..];
    let ybar = y.iter().sum::<f64>() / m as f64;
    let lagbar: Vec<f64> = (1..=p)
        .map(|i| history[start - i..n - i].iter().sum::<f64>() / m as f64)
        .collect();
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for t in start..n {
        let dy = history[t] - ybar;
        for i in 0..p {
            let di = history[t - 1 - i] - lagbar[i];
            rhs[i] += di * dy;
            for j in 0..=i {
                gram[i * p + j] += di * (history[t - 1 - j] - lagbar[j]);
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            gram[j * p + i] = gram[i * p + j];
        }
    }
    let coefficients = if p == 0 { Vec::new() } else { solve_spd(&gram, &rhs)? };
    let intercept = ybar - coefficients.iter().zip(&lagbar).map(|(c, l)| c * l).sum::<f64>();
    let mut sse = 0.0;
    for t in start..n {
        let pred = intercept + (0..p).map(|i| coefficients[i] * history[t - 1 - i]).sum::<f64>();
        let e = history[t] - pred;
        sse += e * e;
    }
    Some(ArFit {
        intercept,
        coefficients,
        sse,
        n_obs: m,
    })
}

/// Fits AR(`p`) on every usable point of `history`.
pub fn fit_ar(history: &[f64], p: usize) -> Option<ArFit> {
    if history.len() <= p {
        return None;
    }
    fit_on_sample(history, p, p)
}

/// AR with the order chosen by AICc among `0..=max_order`, every candidate
/// fitted on the same sample.
#[derive(Debug, Clone, Copy)]
pub struct ArAuto {
    max_order: usize,
}

impl ArAuto {
    pub fn new(max_order: usize) -> Self {
        Self { max_order }
    }

    /// Chosen fit for `history`.
    pub fn select(&self, history: &[f64]) -> Option<ArFit> {
        let n = history.len();
        let max_p = self.max_order.min(n.saturating_sub(1) / 3);
        let mut best: Option<(f64, usize)> = None;
        for p in 0..=max_p {
            let Some(fit) = fit_on_sample(history, p, max_p) else {
                continue;
            };
            let score = fit.aicc();
            if best.map_or(true, |(b, _)| score < b) {
                best = Some((score, p));
            }
        }
        // Refit the winner on all usable points.
        best.and_then(|(_, p)| fit_ar(history, p))
    }
}

impl Default for ArAuto {
    fn default() -> Self {
        Self::new(6)
    }
}

impl Forecaster for ArAuto {
    fn name(&self) -> &str {
        "ar"
    }

    fn min_history(&self, _period: usize) -> usize {
        4
    }

    fn forecast(&self, history: &[f64], _period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        let fit = self
            .select(history)
            .ok_or_else(|| ForecastError::inapplicable("ar", "no non-singular order"))?;
        Ok(fit.forecast(history, horizon))
    }
}
