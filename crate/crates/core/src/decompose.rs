//! Classical multiplicative decomposition and the autocorrelation-based
//! seasonality gate used by Naive2 and Theta.

/// Sample autocorrelations at lags `1..=max_lag`. Returns `None` for a
/// series without spread.
pub fn acf(x: &[f64], max_lag: usize) -> Option<Vec<f64>> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let denom: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if !(denom > 0.0) {
        return None;
    }
    Some(
        (1..=max_lag)
            .map(|k| {
                if k >= n {
                    return 0.0;
                }
                (0..n - k).map(|t| (x[t] - mean) * (x[t + k] - mean)).sum::<f64>() / denom
            })
            .collect(),
    )
}

/// 90% autocorrelation test at lag `period`:
/// `|r_m| > 1.645 * sqrt((1 + 2 * sum_{j<m} r_j^2) / n)`.
///
/// Always false when `period < 2` or the series has fewer than three full
/// cycles.
pub fn is_seasonal(x: &[f64], period: usize) -> bool {
    let n = x.len();
    if period < 2 || n < 3 * period {
        return false;
    }
    let Some(r) = acf(x, period) else {
        return false;
    };
    let sum_sq: f64 = r[..period - 1].iter().map(|v| v * v).sum();
    let limit = 1.645 * ((1.0 + 2.0 * sum_sq) / n as f64).sqrt();
    r[period - 1].abs() > limit
}

/// Seasonal indices (length `period`, mean 1) of a classical multiplicative
/// decomposition. Position `j` applies to every time index `t` with
/// `t % period == j`. Requires two full cycles and strictly positive data.
pub fn multiplicative_indices(x: &[f64], period: usize) -> Option<Vec<f64>> {
    let n = x.len();
    if period < 2 || n < 2 * period || x.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    // Centred moving average: 2 x m for even m, plain m for odd m.
    let (weights, offset) = if period % 2 == 0 {
        let mut w = vec![1.0 / period as f64; period + 1];
        w[0] *= 0.5;
        w[period] *= 0.5;
        (w, period / 2)
    } else {
        (vec![1.0 / period as f64; period], (period - 1) / 2)
    };
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for t in offset..n.saturating_sub(weights.len() - 1 - offset) {
        let trend: f64 = weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * x[t + j - offset])
            .sum();
        if trend > 0.0 {
            sums[t % period] += x[t] / trend;
            counts[t % period] += 1;
        }
    }
    if counts.iter().any(|&c| c == 0) {
        return None;
    }
    let mut figure: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let mean = figure.iter().sum::<f64>() / period as f64;
    for v in &mut figure {
        *v /= mean;
    }
    Some(figure)
}

/// Seasonal adjustment applied only when the series passes the seasonality
/// gate and is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalAdjustment {
    pub adjusted: Vec<f64>,
    indices: Option<Vec<f64>>,
    n: usize,
}

impl SeasonalAdjustment {
    pub fn detect(x: &[f64], period: usize) -> Self {
        let indices = if is_seasonal(x, period) {
            multiplicative_indices(x, period)
        } else {
            None
        };
        let adjusted = match &indices {
            Some(idx) => x.iter().enumerate().map(|(t, v)| v / idx[t % period]).collect(),
            None => x.to_vec(),
        };
        Self {
            adjusted,
            indices,
            n: x.len(),
        }
    }

    pub fn is_seasonal(&self) -> bool {
        self.indices.is_some()
    }

    /// Multiplies forecasts of the adjusted series by the continuing
    /// seasonal cycle.
    pub fn reseasonalize(&self, forecast: &mut [f64]) {
        if let Some(idx) = &self.indices {
            let m = idx.len();
            for (j, v) in forecast.iter_mut().enumerate() {
                *v *= idx[(self.n + j) % m];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acf_of_constant_is_undefined() {
        assert!(acf(&[3.0; 10], 2).is_none());
    }

    #[test]
    fn seasonal_gate_requires_three_cycles() {
        let pattern = [1.0, 3.0, 2.0, 5.0];
        let long: Vec<f64> = (0..40).map(|t| 10.0 + pattern[t % 4]).collect();
        assert!(is_seasonal(&long, 4));
        assert!(!is_seasonal(&long[..11], 4));
        assert!(!is_seasonal(&long, 1));
    }

    #[test]
    fn indices_recover_exact_multiplicative_pattern() {
        let factors = [0.8, 1.1, 1.3, 0.8];
        let x: Vec<f64> = (0..24).map(|t| 50.0 * factors[t % 4]).collect();
        let idx = multiplicative_indices(&x, 4).unwrap();
        for (a, b) in idx.iter().zip(factors) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_period_indices() {
        let factors = [0.5, 1.0, 1.5];
        let x: Vec<f64> = (0..15).map(|t| 10.0 * factors[t % 3]).collect();
        let idx = multiplicative_indices(&x, 3).unwrap();
        for (a, b) in idx.iter().zip(factors) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
