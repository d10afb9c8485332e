//! Seeded synthetic panels for tests, demos and benchmarks when real data
//! is unavailable.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::series::SeriesMatrix;

/// Category labels assigned round-robin to synthetic series.
pub const CATEGORIES: &[&str] = &["Demographic", "Finance", "Industry", "Macro", "Micro", "Other"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PanelConfig {
    pub n_series: usize,
    pub n_latent: usize,
    /// Total length of every series (training plus test window).
    pub length: usize,
    pub period: usize,
    /// Standard deviation of the idiosyncratic noise relative to the
    /// series level.
    pub noise: f64,
    /// Maximum number of latent processes mixed into one series.
    pub max_components: usize,
    pub seed: u64,
}

impl Default for PanelConfig {
    fn default() -> Self {
        Self {
            n_series: 500,
            n_latent: 18,
            length: 72,
            period: 12,
            noise: 0.05,
            max_components: 3,
            seed: 0,
        }
    }
}

/// A generated panel with its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticPanel {
    pub data: SeriesMatrix,
    pub categories: HashMap<String, String>,
    /// K×T latent processes.
    pub latent: Matrix,
    /// K×N mixing weights, in units of each series' level.
    pub loadings: Matrix,
}

/// Shape of a latent process. Every kind is forecastable by some menu
/// method: seasonal-naive, Holt, Holt-Winters or damped Holt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Seasonal,
    Trend,
    SeasonalTrend,
    DampedTrend,
}

const KINDS: [Kind; 4] = [Kind::Seasonal, Kind::Trend, Kind::SeasonalTrend, Kind::DampedTrend];

fn seasonal_pattern(rng: &mut ChaCha8Rng, period: usize) -> Vec<f64> {
    let m = period.max(2) as f64;
    let (p1, p2): (f64, f64) = (rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.0..std::f64::consts::TAU));
    let a2: f64 = rng.random_range(0.0..0.6);
    (0..period.max(2))
        .map(|s| {
            let w = std::f64::consts::TAU * s as f64 / m;
            (w + p1).sin() + a2 * (2.0 * w + p2).sin()
        })
        .collect()
}

/// One latent process of length `t`, roughly unit scale.
fn latent_process(rng: &mut ChaCha8Rng, kind: Kind, t: usize, period: usize) -> Vec<f64> {
    let centre = (t as f64 - 1.0) / 2.0;
    let small = Normal::new(0.0, 0.05).expect("valid sd");
    match kind {
        Kind::Seasonal => {
            let p = seasonal_pattern(rng, period);
            (0..t).map(|s| p[s % p.len()] + small.sample(rng)).collect()
        }
        Kind::Trend => {
            let slope = rng.random_range(1.0..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            (0..t).map(|s| slope * (s as f64 - centre) / centre + small.sample(rng)).collect()
        }
        Kind::SeasonalTrend => {
            let p = seasonal_pattern(rng, period);
            let slope = rng.random_range(0.5..1.0);
            (0..t)
                .map(|s| 0.7 * p[s % p.len()] + slope * (s as f64 - centre) / centre + small.sample(rng))
                .collect()
        }
        Kind::DampedTrend => {
            let phi: f64 = rng.random_range(0.9..0.97);
            let mut v = 0.0;
            let mut b = rng.random_range(0.1..0.2) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            (0..t)
                .map(|_| {
                    v += b;
                    b *= phi;
                    v + small.sample(rng)
                })
                .collect()
        }
    }
}

/// Panel of positive series, each a level times one plus a weighted mix of
/// a few shared latent processes, plus idiosyncratic Gaussian noise.
///
/// Before noise, the mean-removed panel has rank at most `n_latent + 1`.
pub fn latent_panel(config: &PanelConfig) -> SyntheticPanel {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (k, n, t) = (config.n_latent.max(1), config.n_series, config.length);
    let mut latent = Matrix::zeros(k, t);
    for j in 0..k {
        let x = latent_process(&mut rng, KINDS[j % KINDS.len()], t, config.period);
        latent.row_mut(j).copy_from_slice(&x);
    }
    let mut loadings = Matrix::zeros(k, n);
    let mut rows = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    let mut categories = HashMap::new();
    for i in 0..n {
        let components = rng.random_range(1..=config.max_components.max(1));
        for _ in 0..components {
            let j = rng.random_range(0..k);
            let w: f64 = rng.random_range(0.05..0.15);
            loadings[(j, i)] += w;
        }
        let level = 10f64.powf(rng.random_range(2.0..4.0));
        let mut signal: Vec<f64> = (0..t)
            .map(|s| 1.0 + (0..k).map(|j| loadings[(j, i)] * latent[(j, s)]).sum::<f64>())
            .collect();
        // Keep the series comfortably positive; a constant offset keeps the
        // latent structure intact.
        let lo = signal.iter().copied().fold(f64::INFINITY, f64::min);
        if lo < 0.3 {
            signal.iter_mut().for_each(|v| *v += 0.3 - lo);
        }
        let row: Vec<f64> = signal
            .iter()
            .map(|v| {
                let e: f64 = StandardNormal.sample(&mut rng);
                level * (v + config.noise * e)
            })
            .map(|v| v.max(level * 0.01))
            .collect();
        let id = format!("S{}", i + 1);
        categories.insert(id.clone(), CATEGORIES[i % CATEGORIES.len()].to_string());
        ids.push(id);
        rows.push(row);
    }
    let data = SeriesMatrix::from_rows(ids, &rows, config.period.max(1)).expect("generated panel is valid");
    SyntheticPanel {
        data,
        categories,
        latent,
        loadings,
    }
}

/// `n`×`t` panel `AB + noise` with `A` (n×rank) and `B` (rank×t) standard
/// normal, noise standard deviation `noise` times the signal's RMS.
pub fn exact_rank_panel(n: usize, t: usize, rank: usize, noise: f64, seed: u64) -> SeriesMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let a = draw(n * rank);
    let b = draw(rank * t);
    let mut signal: Vec<f64> = (0..n * t)
        .map(|idx| {
            let (i, s) = (idx / t, idx % t);
            (0..rank).map(|r| a[i * rank + r] * b[r * t + s]).sum()
        })
        .collect();
    let rms = (signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64).sqrt();
    let e = draw(n * t);
    for (v, e) in signal.iter_mut().zip(e) {
        *v += noise * rms * e;
    }
    let rows: Vec<Vec<f64>> = signal.chunks(t).map(<[f64]>::to_vec).collect();
    let ids = (1..=n).map(|i| format!("R{i}")).collect();
    SeriesMatrix::from_rows(ids, &rows, 1).expect("generated panel is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_is_positive_deterministic_and_categorized() {
        let cfg = PanelConfig {
            n_series: 40,
            seed: 7,
            ..Default::default()
        };
        let a = latent_panel(&cfg);
        let b = latent_panel(&cfg);
        assert_eq!(a.data, b.data);
        assert_eq!(a.data.n_series(), 40);
        assert_eq!(a.data.n_cols(), 72);
        assert!(a.data.raw_values().iter().all(|&v| v > 0.0));
        assert_eq!(a.categories["S1"], CATEGORIES[0]);
        let c = latent_panel(&PanelConfig { seed: 8, ..cfg });
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn exact_rank_panel_shape() {
        let p = exact_rank_panel(8, 10, 2, 0.0, 1);
        assert_eq!((p.n_series(), p.n_cols()), (8, 10));
    }
}
