//! Box-Cox variance stabilization wrapped around any forecaster.

use super::{ForecastError, Forecaster};

/// Box-Cox transform of a positive value.
pub fn boxcox(y: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        y.ln()
    } else if lambda == 1.0 {
        y - 1.0
    } else {
        (lambda * y.ln()).exp_m1() / lambda
    }
}

/// Inverse transform. When `1 + λz <= 0` the preimage is the boundary of the
/// transform's range: 0 for `λ > 0`, unbounded for `λ < 0`.
pub fn boxcox_inverse(z: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return z.exp();
    }
    if lambda == 1.0 {
        return z + 1.0;
    }
    let base = lambda * z;
    if base <= -1.0 {
        return if lambda > 0.0 { 0.0 } else { f64::INFINITY };
    }
    (base.ln_1p() / lambda).exp()
}

/// Guerrero's method: the λ making the ratio of within-block standard
/// deviation to `mean^(1-λ)` most nearly constant, searched in [-1, 2].
/// Blocks are seasonal cycles (pairs for non-seasonal data). Returns 1 when
/// the data carries no spread to stabilize. Requires positive data.
pub fn guerrero_lambda(y: &[f64], period: usize) -> f64 {
    let block = period.max(2);
    let stats: Vec<(f64, f64)> = y
        .rchunks_exact(block)
        .map(|c| {
            let mean = c.iter().sum::<f64>() / block as f64;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (block - 1) as f64;
            (mean, var.sqrt())
        })
        .collect();
    if stats.len() < 2 || stats.iter().all(|&(_, sd)| sd == 0.0) {
        return 1.0;
    }
    let cv = |lambda: f64| -> f64 {
        let ratios: Vec<f64> = stats.iter().map(|&(m, sd)| sd / m.powf(1.0 - lambda)).collect();
        let k = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / k;
        let sd = (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
        if mean > 0.0 && sd.is_finite() {
            sd / mean
        } else {
            f64::INFINITY
        }
    };
    let grid: Vec<f64> = (0..=30).map(|i| -1.0 + 0.1 * i as f64).collect();
    let mut best = 0;
    for (i, &l) in grid.iter().enumerate() {
        if cv(l) < cv(grid[best]) {
            best = i;
        }
    }
    // Golden-section refinement within the neighbouring grid cells.
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..40 {
        if cv(c) < cv(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let refined = (a + b) / 2.0;
    if cv(refined) <= cv(grid[best]) {
        refined
    } else {
        grid[best]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Guerrero,
    Fixed(f64),
}

/// Forecasts the Box-Cox-transformed series with an inner method and maps
/// the forecasts back. Inapplicable to data that is not strictly positive.
pub struct BoxCox {
    inner: Box<dyn Forecaster>,
    lambda: LambdaChoice,
    name: String,
}

impl BoxCox {
    pub fn new(inner: Box<dyn Forecaster>, lambda: LambdaChoice) -> Self {
        let name = format!("{}_boxcox", inner.name());
        Self { inner, lambda, name }
    }

    pub fn auto(inner: Box<dyn Forecaster>) -> Self {
        Self::new(inner, LambdaChoice::Guerrero)
    }
}

impl Forecaster for BoxCox {
    fn name(&self) -> &str {
        &self.name
    }

    fn min_history(&self, period: usize) -> usize {
        self.inner.min_history(period)
    }

    fn forecast(&self, history: &[f64], period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        if history.iter().any(|&v| v <= 0.0) {
            return Err(ForecastError::inapplicable(&self.name, "needs strictly positive data"));
        }
        let lambda = match self.lambda {
            LambdaChoice::Guerrero => guerrero_lambda(history, period),
            LambdaChoice::Fixed(l) => l,
        };
        let transformed: Vec<f64> = history.iter().map(|&v| boxcox(v, lambda)).collect();
        let out = self.inner.forecast(&transformed, period, horizon)?;
        Ok(out.into_iter().map(|z| boxcox_inverse(z, lambda)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecasters::{fit_predict, Naive};

    #[test]
    fn transform_round_trips() {
        for &lambda in &[-1.0, -0.3, 0.0, 0.5, 1.0, 2.0] {
            for &y in &[0.01, 1.0, 3.7, 1e4] {
                let back = boxcox_inverse(boxcox(y, lambda), lambda);
                assert!((back - y).abs() <= 1e-10 * y.max(1.0), "{lambda} {y} {back}");
            }
        }
        assert_eq!(boxcox_inverse(-5.0, 0.5), 0.0);
    }

    #[test]
    fn multiplicative_growth_prefers_log() {
        // Spread proportional to level suggests λ near 0.
        let pattern = [0.9, 1.1, 0.95, 1.05];
        let y: Vec<f64> = (0..48usize).map(|t| 1.05f64.powi(t as i32) * 100.0 * pattern[t % 4]).collect();
        let lambda = guerrero_lambda(&y, 4);
        assert!(lambda.abs() < 0.3, "{lambda}");
        assert_eq!(guerrero_lambda(&[5.0; 24], 4), 1.0);
    }

    #[test]
    fn wrapper_names_and_positivity() {
        let bc = BoxCox::auto(Box::new(Naive));
        assert_eq!(bc.name(), "naive_boxcox");
        assert!(fit_predict(&bc, &[1.0, -1.0, 2.0], 1, 1).is_err());
        let f = fit_predict(&bc, &[1.0, 2.0, 3.0, 4.0], 1, 2).unwrap();
        assert!((f[0] - 4.0).abs() < 1e-9);
    }
}
