//! Exponential smoothing: simple, Holt's linear and damped trend, and
//! Holt-Winters with additive or multiplicative seasonality.
//!
//! Smoothing parameters are chosen by exhaustive grid search minimizing the
//! in-sample one-step-ahead squared error, which keeps every fit
//! deterministic.

use super::{linear_fit, smoothing_grid, ForecastError, Forecaster};

/// Simple exponential smoothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ses;

/// One-step SSE and final level of SES with smoothing `alpha`.
pub(crate) fn ses_filter(y: &[f64], alpha: f64) -> (f64, f64) {
    let mut level = y[0];
    let mut sse = 0.0;
    for &v in &y[1..] {
        let e = v - level;
        sse += e * e;
        level += alpha * e;
    }
    (sse, level)
}

/// Fits SES on `y` and returns the flat forecast level.
pub(crate) fn ses_level(y: &[f64]) -> f64 {
    let mut best = (f64::INFINITY, y[y.len() - 1]);
    for alpha in smoothing_grid() {
        let (sse, level) = ses_filter(y, alpha);
        if sse < best.0 {
            best = (sse, level);
        }
    }
    best.1
}

impl Forecaster for Ses {
    fn name(&self) -> &str {
        "ses"
    }

    fn min_history(&self, _period: usize) -> usize {
        2
    }

    fn forecast(&self, history: &[f64], _period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        Ok(vec![ses_level(history); horizon])
    }
}

/// Holt's trend method, optionally damped.
#[derive(Debug, Clone)]
pub struct Holt {
    name: &'static str,
    phis: Vec<f64>,
}

impl Holt {
    /// Undamped linear trend.
    pub fn linear() -> Self {
        Self {
            name: "holt",
            phis: vec![1.0],
        }
    }

    /// Damped trend with the damping factor chosen from a small grid.
    pub fn damped() -> Self {
        Self {
            name: "holt_damped",
            phis: vec![0.8, 0.85, 0.9, 0.95, 0.98],
        }
    }

    /// Fixed damping factor `phi` in (0, 1]; `phi = 1` is the linear trend.
    pub fn with_phi(name: &'static str, phi: f64) -> Self {
        Self { name, phis: vec![phi] }
    }

    /// Number of leading points used to initialize level and trend.
    fn init_len(n: usize) -> usize {
        n.min(10)
    }
}

impl Forecaster for Holt {
    fn name(&self) -> &str {
        self.name
    }

    fn min_history(&self, _period: usize) -> usize {
        4
    }

    fn forecast(&self, history: &[f64], _period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        let (a, b) = linear_fit(&history[..Self::init_len(history.len())]);
        // Level at t = -1 so that the first one-step forecast is a + 0 * b.
        let (l0, b0) = (a - b, b);
        let mut best: Option<(f64, f64, f64, f64)> = None;
        for &phi in &self.phis {
            for alpha in smoothing_grid() {
                for beta in smoothing_grid() {
                    let beta = beta * alpha;
                    let (mut l, mut tr) = (l0, b0);
                    let mut sse = 0.0;
                    for &v in history {
                        let pred = l + phi * tr;
                        let e = v - pred;
                        sse += e * e;
                        let new_l = pred + alpha * e;
                        tr = phi * tr + beta * e;
                        l = new_l;
                    }
                    if sse.is_finite() && best.map_or(true, |b| sse < b.0) {
                        best = Some((sse, l, tr, phi));
                    }
                }
            }
        }
        let (_, l, tr, phi) = best.ok_or_else(|| ForecastError::inapplicable(self.name, "no finite fit"))?;
        let mut out = Vec::with_capacity(horizon);
        let mut damp = 0.0;
        let mut pow = 1.0;
        for _ in 0..horizon {
            pow *= phi;
            damp += pow;
            out.push(l + damp * tr);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Seasonality {
    Additive,
    Multiplicative,
}

/// Holt-Winters with a linear trend and a seasonal cycle of the data's
/// period.
#[derive(Debug, Clone, Copy)]
pub struct HoltWinters {
    kind: Seasonality,
}

impl HoltWinters {
    pub fn additive() -> Self {
        Self {
            kind: Seasonality::Additive,
        }
    }

    /// Requires strictly positive data.
    pub fn multiplicative() -> Self {
        Self {
            kind: Seasonality::Multiplicative,
        }
    }

    /// Initial level, trend and seasonal states from the first two cycles.
    fn initial_state(&self, y: &[f64], m: usize) -> (f64, f64, Vec<f64>) {
        let mean1 = y[..m].iter().sum::<f64>() / m as f64;
        let mean2 = y[m..2 * m].iter().sum::<f64>() / m as f64;
        let trend = (mean2 - mean1) / m as f64;
        let centre = (m as f64 - 1.0) / 2.0;
        let mut seasons: Vec<f64> = (0..m)
            .map(|i| {
                let base = mean1 + (i as f64 - centre) * trend;
                match self.kind {
                    Seasonality::Additive => y[i] - base,
                    Seasonality::Multiplicative => y[i] / base,
                }
            })
            .collect();
        match self.kind {
            Seasonality::Additive => {
                let mean = seasons.iter().sum::<f64>() / m as f64;
                seasons.iter_mut().for_each(|s| *s -= mean);
            }
            Seasonality::Multiplicative => {
                let mean = seasons.iter().sum::<f64>() / m as f64;
                seasons.iter_mut().for_each(|s| *s /= mean);
            }
        }
        // Level at the end of the first cycle.
        (mean1 + (m as f64 - 1.0 - centre) * trend, trend, seasons)
    }
}

impl Forecaster for HoltWinters {
    fn name(&self) -> &str {
        match self.kind {
            Seasonality::Additive => "hw_additive",
            Seasonality::Multiplicative => "hw_multiplicative",
        }
    }

    fn min_history(&self, period: usize) -> usize {
        2 * period.max(2)
    }

    fn forecast(&self, history: &[f64], period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        let m = period;
        if m < 2 {
            return Err(ForecastError::inapplicable(self.name(), "needs a seasonal period of at least 2"));
        }
        let mult = self.kind == Seasonality::Multiplicative;
        if mult && history.iter().any(|&v| v <= 0.0) {
            return Err(ForecastError::inapplicable(self.name(), "needs strictly positive data"));
        }
        let (l0, b0, s0) = self.initial_state(history, m);
        if mult && s0.iter().any(|s| !(*s > 0.0)) {
            return Err(ForecastError::inapplicable(self.name(), "non-positive seasonal index"));
        }
        let mut best: Option<(f64, f64, f64, Vec<f64>)> = None;
        let mut seasons = vec![0.0; m];
        for alpha in smoothing_grid() {
            for beta in smoothing_grid() {
                let beta = beta * alpha;
                for gamma in smoothing_grid() {
                    let gamma = gamma * (1.0 - alpha);
                    seasons.copy_from_slice(&s0);
                    let (mut l, mut b) = (l0, b0);
                    let mut sse = 0.0;
                    for (t, &v) in history.iter().enumerate().skip(m) {
                        let s = seasons[t % m];
                        let base = l + b;
                        let (pred, new_l) = if mult {
                            (base * s, alpha * (v / s) + (1.0 - alpha) * base)
                        } else {
                            (base + s, alpha * (v - s) + (1.0 - alpha) * base)
                        };
                        let e = v - pred;
                        sse += e * e;
                        b = beta * (new_l - l) + (1.0 - beta) * b;
                        seasons[t % m] = if mult {
                            gamma * (v / new_l) + (1.0 - gamma) * s
                        } else {
                            gamma * (v - new_l) + (1.0 - gamma) * s
                        };
                        l = new_l;
                    }
                    if sse.is_finite() && best.as_ref().map_or(true, |bst| sse < bst.0) {
                        best = Some((sse, l, b, seasons.clone()));
                    }
                }
            }
        }
        let (_, l, b, seasons) = best.ok_or_else(|| ForecastError::inapplicable(self.name(), "no finite fit"))?;
        let n = history.len();
        Ok((1..=horizon)
            .map(|j| {
                let s = seasons[(n + j - 1) % m];
                let base = l + j as f64 * b;
                if mult {
                    base * s
                } else {
                    base + s
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecasters::fit_predict;

    #[test]
    fn ses_tracks_level_shift() {
        let mut h = vec![10.0; 20];
        h.extend(vec![20.0; 20]);
        let f = fit_predict(&Ses, &h, 1, 3).unwrap();
        assert!((f[0] - 20.0).abs() < 1e-3, "{f:?}");
    }

    #[test]
    fn holt_extrapolates_exact_line() {
        let h: Vec<f64> = (0..30).map(|t| 5.0 + 2.0 * t as f64).collect();
        let f = fit_predict(&Holt::linear(), &h, 1, 4).unwrap();
        for (j, v) in f.iter().enumerate() {
            assert!((v - (5.0 + 2.0 * (30 + j) as f64)).abs() < 1e-9, "{f:?}");
        }
        let d = fit_predict(&Holt::damped(), &h, 1, 12).unwrap();
        // A damped trend grows, but slower than the line.
        assert!(d[11] > d[0] && d[11] < 5.0 + 2.0 * 41.0);
    }

    #[test]
    fn holt_winters_continues_a_seasonal_pattern() {
        let pattern = [3.0, -1.0, 2.0, -4.0];
        let h: Vec<f64> = (0..40).map(|t| 50.0 + 0.5 * t as f64 + pattern[t % 4]).collect();
        let f = fit_predict(&HoltWinters::additive(), &h, 4, 8).unwrap();
        for (j, v) in f.iter().enumerate() {
            let t = 40 + j;
            let truth = 50.0 + 0.5 * t as f64 + pattern[t % 4];
            assert!((v - truth).abs() < 1e-6, "{j}: {v} vs {truth}");
        }
        let pm: Vec<f64> = (0..40).map(|t| 100.0 * (1.0 + 0.1 * pattern[t % 4])).collect();
        let f = fit_predict(&HoltWinters::multiplicative(), &pm, 4, 4).unwrap();
        for (j, v) in f.iter().enumerate() {
            let truth = 100.0 * (1.0 + 0.1 * pattern[(40 + j) % 4]);
            assert!((v - truth).abs() < 1e-6, "{v} vs {truth}");
        }
    }

    #[test]
    fn multiplicative_needs_positive_data() {
        let h: Vec<f64> = (0..24).map(|t| (t as f64).sin()).collect();
        assert!(matches!(
            fit_predict(&HoltWinters::multiplicative(), &h, 4, 2),
            Err(ForecastError::Inapplicable { .. })
        ));
        assert!(fit_predict(&HoltWinters::additive(), &h, 1, 2).is_err());
    }
}
