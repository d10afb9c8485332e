//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances, trial counts and runtime
//! budgets are fixed below and must not be relaxed to make a run pass.
//!
//! Criterion 6 uses a truncated M4-monthly sample when
//! `LATENTCAST_M4_MONTHLY` names the M4 `Monthly-train.csv`; otherwise it
//! uses the built-in synthetic panel of 18 forecastable latent processes.

use std::path::Path;
use std::time::{Duration, Instant};

use latentcast::audit::Guarded;
use latentcast::decompose;
use latentcast::forecasters::MethodMenu;
use latentcast::io;
use latentcast::metrics;
use latentcast::pipeline::{self, RunConfig, Stopwatch};
use latentcast::rank;
use latentcast::selection::{plan_folds, rank_methods, CvSettings};
use latentcast::series::SeriesMatrix;
use latentcast::synthetic::{self, PanelConfig};
use latentcast::trmf::{self, TrmfConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// Criterion 1.
const METRIC_CASES: usize = 200;
const METRIC_REL_TOL: f64 = 1e-9;
const METRIC_BUDGET: Duration = Duration::from_secs(5);
// Criterion 2.
const MONO_PANELS: u64 = 50;
const MONO_REL_TOL: f64 = 1e-10;
// Criterion 3.
const SVD_TOL: f64 = 1e-6;
const SVD_MATRICES: u64 = 5;
const SVD_BUDGET: Duration = Duration::from_secs(10);
// Criterion 4.
const ELBOW_TRIALS: u64 = 20;
const ELBOW_REQUIRED: usize = 18;
const ELBOW_BUDGET: Duration = Duration::from_secs(120);
// Criterion 5.
const SELECT_TRIALS: u64 = 50;
const SELECT_REQUIRED_FRACTION: f64 = 0.9;
const SELECT_BUDGET: Duration = Duration::from_secs(300);
// Criterion 6.
const OWA_RATIO_MAX: f64 = 0.9;
const PANEL_BUDGET: Duration = Duration::from_secs(30 * 60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_budget(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

// ---------------------------------------------------------------------------
// Criterion 1: brute-force evaluator of Eqs. 3-5 and the M4 Naive2 procedure.

mod oracle {
    /// Eq. 3, term by term.
    pub fn smape(y: &[f64], f: &[f64]) -> f64 {
        let h = y.len() as f64;
        let mut total = 0.0;
        for t in 0..y.len() {
            let num = (y[t] - f[t]).abs();
            let den = (y[t] + f[t]).abs();
            total += if num == 0.0 { 0.0 } else { num / den };
        }
        2.0 / h * total * 100.0
    }

    /// Eq. 4 with the in-sample seasonal-naive denominator.
    pub fn mase(y: &[f64], f: &[f64], insample: &[f64], m: usize) -> f64 {
        let n = insample.len();
        let mut scale = 0.0;
        for t in m..n {
            scale += (insample[t] - insample[t - m]).abs();
        }
        scale /= (n - m) as f64;
        let mut err = 0.0;
        for t in 0..y.len() {
            err += (y[t] - f[t]).abs();
        }
        err / y.len() as f64 / scale
    }

    /// Eq. 5 on arithmetic means of per-series scores.
    pub fn owa(smape_m: &[f64], mase_m: &[f64], smape_n: &[f64], mase_n: &[f64]) -> f64 {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        0.5 * (mean(smape_m) / mean(smape_n) + mean(mase_m) / mean(mase_n))
    }

    fn autocorrelation(x: &[f64], lag: usize) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let mut num = 0.0;
        for t in 0..n - lag {
            num += (x[t] - mean) * (x[t + lag] - mean);
        }
        let mut den = 0.0;
        for v in x {
            den += (v - mean) * (v - mean);
        }
        num / den
    }

    /// The M4 `SeasonalityTest`: 90% test on the lag-`ppy` autocorrelation.
    pub fn seasonality_test(x: &[f64], ppy: usize) -> bool {
        if ppy < 2 || x.len() < 3 * ppy {
            return false;
        }
        let mut acc = 1.0;
        for j in 1..ppy {
            let r = autocorrelation(x, j);
            acc += 2.0 * r * r;
        }
        let limit = 1.645 / (x.len() as f64).sqrt() * acc.sqrt();
        autocorrelation(x, ppy).abs() > limit
    }

    /// R's `decompose(type = "multiplicative")$figure`.
    fn seasonal_figure(x: &[f64], f: usize) -> Vec<f64> {
        let l = x.len();
        let mut filter = vec![1.0 / f as f64; f + 1];
        if f % 2 == 0 {
            filter[0] = 0.5 / f as f64;
            filter[f] = 0.5 / f as f64;
        } else {
            filter.pop();
        }
        let half = filter.len() / 2;
        let mut season = vec![f64::NAN; l];
        for t in half..l {
            if t + filter.len() - half > l {
                break;
            }
            let mut trend = 0.0;
            for (j, w) in filter.iter().enumerate() {
                trend += w * x[t + j - half];
            }
            season[t] = x[t] / trend;
        }
        let mut figure = vec![0.0; f];
        for (i, fig) in figure.iter_mut().enumerate() {
            let mut sum = 0.0;
            let mut count = 0;
            let mut t = i;
            while t < l {
                if !season[t].is_nan() {
                    sum += season[t];
                    count += 1;
                }
                t += f;
            }
            *fig = sum / count as f64;
        }
        let mean = figure.iter().sum::<f64>() / f as f64;
        figure.iter().map(|v| v / mean).collect()
    }

    /// M4 Naive2: naive forecast of the deseasonalized series, reseasonalized.
    pub fn naive2(x: &[f64], ppy: usize, h: usize) -> Vec<f64> {
        let l = x.len();
        if !seasonality_test(x, ppy) {
            return vec![x[l - 1]; h];
        }
        let figure = seasonal_figure(x, ppy);
        let last = x[l - 1] / figure[(l - 1) % ppy];
        (0..h).map(|j| last * figure[(l + j) % ppy]).collect()
    }
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-1.0..4.0));
    (0..len).map(|_| scale * rng.random_range(0.05..1.0)).collect()
}

/// Hand-classified monthly series of length 72: `true` means seasonal.
fn classified_series() -> Vec<(&'static str, bool, Vec<f64>)> {
    let tau = std::f64::consts::TAU;
    let mut out: Vec<(&'static str, bool, Vec<f64>)> = Vec::new();
    let n = 72;
    let t = |k: usize| k as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut noise = |sd: f64| -> Vec<f64> {
        (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                sd * e
            })
            .collect()
    };
    let e1 = noise(1.0);
    out.push(("pure sine", true, (0..n).map(|k| 100.0 + 20.0 * (tau * t(k) / 12.0).sin()).collect()));
    out.push(("shifted sine + noise", true, (0..n).map(|k| 50.0 + 10.0 * (tau * t(k) / 12.0 + 1.0).cos() + e1[k]).collect()));
    out.push(("sine on trend", true, (0..n).map(|k| 200.0 + 2.0 * t(k) + 40.0 * (tau * t(k) / 12.0).sin()).collect()));
    out.push(("multiplicative growth", true, (0..n).map(|k| (100.0 + 3.0 * t(k)) * (1.0 + 0.3 * (tau * t(k) / 12.0).sin())).collect()));
    out.push(("december peak", true, (0..n).map(|k| if k % 12 == 11 { 300.0 } else { 100.0 + (k % 3) as f64 }).collect()));
    out.push(("summer plateau", true, (0..n).map(|k| if (5..8).contains(&(k % 12)) { 180.0 } else { 120.0 }).collect()));
    let pattern = [3.0, 5.0, 9.0, 14.0, 18.0, 20.0, 19.0, 16.0, 12.0, 8.0, 5.0, 3.0];
    let e2 = noise(0.5);
    out.push(("climate cycle", true, (0..n).map(|k| 30.0 + pattern[k % 12] + e2[k]).collect()));
    out.push(("two harmonics", true, (0..n).map(|k| 80.0 + 10.0 * (tau * t(k) / 12.0).sin() + 6.0 * (tau * t(k) / 6.0).cos()).collect()));
    out.push(("quarterly bumps", true, (0..n).map(|k| 60.0 + if k % 12 < 3 { 15.0 } else { 0.0 } + 0.1 * t(k)).collect()));
    let e3 = noise(2.0);
    out.push(("noisy retail", true, (0..n).map(|k| 500.0 + 60.0 * (tau * t(k) / 12.0 - 0.5).sin() + e3[k]).collect()));

    out.push(("linear trend", false, (0..n).map(|k| 10.0 + 0.5 * t(k)).collect()));
    out.push(("quadratic", false, (0..n).map(|k| 5.0 + 0.02 * t(k) * t(k)).collect()));
    out.push(("exponential growth", false, (0..n).map(|k| 100.0 * 1.02f64.powf(t(k))).collect()));
    out.push(("damped rise", false, (0..n).map(|k| 200.0 - 100.0 * 0.95f64.powf(t(k))).collect()));
    out.push(("level shift", false, (0..n).map(|k| if k < 40 { 100.0 } else { 130.0 }).collect()));
    let e4 = noise(1.0);
    let mut walk = 100.0;
    out.push(("random walk", false, (0..n).map(|k| { walk += e4[k]; walk }).collect()));
    out.push(("slow cycle (period 48)", false, (0..n).map(|k| 100.0 + 10.0 * (tau * t(k) / 48.0).sin()).collect()));
    let e5 = noise(1.0);
    let mut ar = 0.0;
    out.push(("AR(1) 0.5", false, (0..n).map(|k| { ar = 0.5 * ar + e5[k]; 50.0 + ar }).collect()));
    out.push(("trend + noise", false, (0..n).map(|k| 40.0 + 0.8 * t(k) + e1[k]).collect()));
    out.push(("logistic", false, (0..n).map(|k| 10.0 + 90.0 / (1.0 + (-(t(k) - 36.0) / 6.0).exp())).collect()));
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = Vec::new();
    for case in 0..METRIC_CASES {
        let period = [1usize, 4, 12][rng.random_range(0..3)];
        let series = rng.random_range(1..=5);
        let h = rng.random_range(1..=18);
        let (mut sm, mut mm, mut sn, mut mn) = (vec![], vec![], vec![], vec![]);
        let (mut lsm, mut lmm, mut lsn, mut lmn) = (vec![], vec![], vec![], vec![]);
        for _ in 0..series {
            let n = rng.random_range(period + 2..=48);
            let insample = random_vec(&mut rng, n);
            let actual = random_vec(&mut rng, h);
            let forecast: Vec<f64> = actual.iter().map(|v| v * rng.random_range(0.5..1.5)).collect();
            let reference: Vec<f64> = actual.iter().map(|v| v * rng.random_range(0.3..1.7)).collect();
            sm.push(oracle::smape(&actual, &forecast));
            mm.push(oracle::mase(&actual, &forecast, &insample, period));
            sn.push(oracle::smape(&actual, &reference));
            mn.push(oracle::mase(&actual, &reference, &insample, period));
            lsm.push(metrics::smape(&actual, &forecast).unwrap());
            lmm.push(metrics::mase(&actual, &forecast, &insample, period).unwrap());
            lsn.push(metrics::smape(&actual, &reference).unwrap());
            lmn.push(metrics::mase(&actual, &reference, &insample, period).unwrap());
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let owa = metrics::owa(mean(&lsm), mean(&lmm), mean(&lsn), mean(&lmn)).unwrap().owa;
        let pairs = lsm.iter().zip(&sm).chain(lmm.iter().zip(&mm)).chain(lsn.iter().zip(&sn)).chain(lmn.iter().zip(&mn));
        let ok = pairs.into_iter().all(|(a, b)| rel_close(*a, *b, METRIC_REL_TOL))
            && rel_close(owa, oracle::owa(&sm, &mm, &sn, &mn), METRIC_REL_TOL);
        if !ok {
            mismatches.push(case);
        }
    }
    let mut gate_errors = Vec::new();
    let mut naive2_errors = Vec::new();
    let classified = classified_series();
    for (name, seasonal, x) in &classified {
        let ours = decompose::is_seasonal(x, 12);
        let reference = oracle::seasonality_test(x, 12);
        if ours != reference || ours != *seasonal {
            gate_errors.push(format!("{name} (label {seasonal}, ours {ours}, M4 {reference})"));
        }
        let f = metrics::naive2(x, 12, 18).unwrap();
        let want = oracle::naive2(x, 12, 18);
        if !f.iter().zip(&want).all(|(a, b)| rel_close(*a, *b, METRIC_REL_TOL)) {
            naive2_errors.push(*name);
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && gate_errors.is_empty() && naive2_errors.is_empty() && within_budget(elapsed, METRIC_BUDGET);
    outcome(
        pass,
        format!(
            "metric oracle: {}/{} cases agree to {:e}; seasonality gate {}/{} agree{}; Naive2 {}/{} agree; {:.2?} (budget {:?})",
            METRIC_CASES - mismatches.len(),
            METRIC_CASES,
            METRIC_REL_TOL,
            classified.len() - gate_errors.len(),
            classified.len(),
            if gate_errors.is_empty() { String::new() } else { format!(" [disagree: {}]", gate_errors.join("; ")) },
            classified.len() - naive2_errors.len(),
            classified.len(),
            elapsed,
            METRIC_BUDGET
        ),
    )
}

// ---------------------------------------------------------------------------

fn random_panel(rng: &mut ChaCha8Rng, n: usize, t: usize, missing: f64) -> SeriesMatrix {
    let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let rows: Vec<Vec<Option<f64>>> = (0..n)
        .map(|_| {
            let level = rng.random_range(-2.0..2.0);
            (0..t)
                .map(|_| {
                    let e: f64 = StandardNormal.sample(rng);
                    (!rng.random_bool(missing)).then_some(level + e)
                })
                .collect()
        })
        .collect();
    SeriesMatrix::from_optional_rows(ids, rows, 12).unwrap()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut iterations = 0;
    for seed in 0..MONO_PANELS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.random_range(5..=100);
        let t = rng.random_range(20..=60);
        let missing = [0.0, 0.05, 0.2][seed as usize % 3];
        let train = random_panel(&mut rng, n, t, missing);
        let config = TrmfConfig {
            rank: rng.random_range(1..=8),
            seed,
            ..TrmfConfig::default()
        };
        match trmf::fit(&train, &config) {
            Ok(model) => {
                iterations += model.objective_trace.len();
                for (i, w) in model.objective_trace.windows(2).enumerate() {
                    let rise = (w[1] - w[0]) / w[0].abs();
                    worst = worst.max(rise);
                    if rise > MONO_REL_TOL {
                        failures.push(format!("panel {seed} iteration {}: {:e}", i + 2, rise));
                        break;
                    }
                }
            }
            Err(e) => failures.push(format!("panel {seed}: {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "objective monotone on {}/{} panels ({} iterations, largest relative rise {:e}, limit {:e}){}; {:.2?}",
            MONO_PANELS as usize - failures.len(),
            MONO_PANELS,
            iterations,
            worst,
            MONO_REL_TOL,
            if failures.is_empty() { String::new() } else { format!(" [{}]", failures.join("; ")) },
            start.elapsed()
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for seed in 0..SVD_MATRICES {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let values: Vec<f64> = (0..64)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                e
            })
            .collect();
        let rows: Vec<Vec<f64>> = values.chunks(8).map(<[f64]>::to_vec).collect();
        let train = SeriesMatrix::from_rows((0..8).map(|i| format!("r{i}")).collect(), &rows, 1).unwrap();
        let sv = nalgebra::DMatrix::from_row_slice(8, 8, &values).singular_values();
        let mut sv: Vec<f64> = sv.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        for k in 1..=3 {
            let svd_error = sv[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
            let config = TrmfConfig {
                rank: k,
                lags: vec![],
                lambda_f: 0.0,
                lambda_x: 0.0,
                lambda_theta: 0.0,
                eta: 0.0,
                max_iterations: 200_000,
                tolerance: 1e-15,
                seed,
                ..TrmfConfig::default()
            };
            let model = match trmf::fit(&train, &config) {
                Ok(m) => m,
                Err(e) => {
                    failures.push(format!("matrix {seed} K={k}: {e}"));
                    continue;
                }
            };
            let fitted = model.reconstruct();
            let ours = (0..8)
                .flat_map(|i| (0..8).map(move |t| (i, t)))
                .map(|(i, t)| (rows[i][t] - fitted[(i, t)]).powi(2))
                .sum::<f64>()
                .sqrt();
            let rel = (ours - svd_error).abs() / svd_error;
            worst = worst.max(rel);
            if rel > SVD_TOL {
                failures.push(format!("matrix {seed} K={k}: {ours} vs {svd_error}"));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && within_budget(elapsed, SVD_BUDGET),
        format!(
            "residual norm matches truncated SVD on {} 8x8 matrices, K=1..3: worst relative gap {:e} (tol {:e}){}; {:.2?} (budget {:?})",
            SVD_MATRICES,
            worst,
            SVD_TOL,
            if failures.is_empty() { String::new() } else { format!(" [{}]", failures.join("; ")) },
            elapsed,
            SVD_BUDGET
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let grid: Vec<usize> = (1..=10).collect();
    let mut picks = Vec::new();
    let mut errors = Vec::new();
    for seed in 0..ELBOW_TRIALS {
        let train = synthetic::exact_rank_panel(40, 48, 3, 0.01, 400 + seed);
        let config = TrmfConfig {
            seed,
            ..TrmfConfig::default()
        };
        match rank::sweep(&train, &grid, &config).and_then(|c| rank::pick_elbow(&c)) {
            Ok(p) => picks.push(p.k),
            Err(e) => errors.push(format!("trial {seed}: {e}")),
        }
    }
    let hits = picks.iter().filter(|k| (2..=5).contains(*k)).count();
    let elapsed = start.elapsed();
    outcome(
        hits >= ELBOW_REQUIRED && within_budget(elapsed, ELBOW_BUDGET),
        format!(
            "elbow picks K in [2,5] in {hits}/{ELBOW_TRIALS} trials (need {ELBOW_REQUIRED}); picks {picks:?}{}; {:.2?} (budget {:?})",
            if errors.is_empty() { String::new() } else { format!(" [{}]", errors.join("; ")) },
            elapsed,
            ELBOW_BUDGET
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let menu = MethodMenu::standard();
    let settings = CvSettings::default();
    let n = 60;
    let plan = plan_folds(n, settings.fold_length, settings.min_train).unwrap();
    let families: [(&str, &[&str]); 3] = [
        ("seasonal", &["snaive"]),
        ("trend", &["holt", "holt_damped", "drift", "holt_boxcox"]),
        ("white noise", &["mean"]),
    ];
    let mut hits = [0usize; 3];
    for seed in 0..SELECT_TRIALS {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let mut gauss = |sd: f64| -> f64 {
            let e: f64 = StandardNormal.sample(&mut rng);
            sd * e
        };
        let pattern: Vec<f64> = (0..12).map(|_| gauss(1.0)).collect();
        let seasonal: Vec<f64> = (0..n).map(|t| pattern[t % 12]).collect();
        let slope = 0.05 + 0.15 * gauss(1.0).abs().min(1.0);
        let intercept = gauss(1.0);
        let trend: Vec<f64> = (0..n).map(|t| intercept + slope * t as f64 + gauss(0.3)).collect();
        // Latent series are standardized-scale and centred, so is the noise.
        let noise: Vec<f64> = (0..n).map(|_| gauss(1.0)).collect();
        for (i, series) in [seasonal, trend, noise].iter().enumerate() {
            let ranking = rank_methods(Guarded::unaudited(series), 12, &menu, &plan, settings.metric, settings.top);
            if ranking.top.iter().any(|m| families[i].1.contains(&m.as_str())) {
                hits[i] += 1;
            }
        }
    }
    let need = (SELECT_REQUIRED_FRACTION * SELECT_TRIALS as f64).ceil() as usize;
    let elapsed = start.elapsed();
    let summary: Vec<String> = families
        .iter()
        .zip(hits)
        .map(|((name, want), h)| format!("{name} -> {}: {h}/{SELECT_TRIALS}", want.join("|")))
        .collect();
    outcome(
        hits.iter().all(|&h| h >= need) && within_budget(elapsed, SELECT_BUDGET),
        format!(
            "CV top-3 ({:?} ranking) contains expected family: {} (need {need}); {:.2?} (budget {:?})",
            settings.metric,
            summary.join(", "),
            elapsed,
            SELECT_BUDGET
        ),
    )
}

// ---------------------------------------------------------------------------

/// 500-series sample of M4-monthly truncated to its last 72 points, or the
/// synthetic fallback panel.
fn benchmark_panel() -> (SeriesMatrix, Option<std::collections::HashMap<String, String>>, String) {
    if let Ok(path) = std::env::var("LATENTCAST_M4_MONTHLY") {
        let data = io::read_series_path(Path::new(&path), 12).expect("readable M4 monthly file");
        let mut eligible: Vec<usize> = (0..data.n_series())
            .filter(|&i| data.row(i).history().len() >= 72)
            .collect();
        eligible.shuffle(&mut ChaCha8Rng::seed_from_u64(6));
        eligible.truncate(500);
        eligible.sort_unstable();
        let ids = eligible.iter().map(|&i| data.ids()[i].clone()).collect();
        let rows: Vec<Vec<f64>> = eligible
            .iter()
            .map(|&i| {
                let h = data.row(i).history();
                h[h.len() - 72..].to_vec()
            })
            .collect();
        let panel = SeriesMatrix::from_rows(ids, &rows, 12).expect("valid sample");
        return (panel, None, format!("M4-monthly sample from {path}"));
    }
    let synthetic = synthetic::latent_panel(&PanelConfig::default());
    (
        synthetic.data,
        Some(synthetic.categories),
        "synthetic panel (500 series, 18 latent processes)".to_string(),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (panel, categories, source) = benchmark_panel();
    let mut config = RunConfig::for_data("in-memory");
    // The criterion compares single methods applied directly; the extra
    // direct-CV baseline row is not needed.
    config.benchmark.direct_cv = false;
    let result = pipeline::prepare_matrix(&panel, &config.split, categories)
        .and_then(|prepared| pipeline::run_prepared(&config, prepared, Stopwatch::start(), false));
    let elapsed = start.elapsed();
    match result {
        Ok(outcome_) => {
            let b = &outcome_.benchmark;
            let best = b.best_direct.as_ref();
            let ratio = b.owa_ratio.unwrap_or(f64::INFINITY);
            outcome(
                ratio <= OWA_RATIO_MAX && within_budget(elapsed, PANEL_BUDGET),
                format!(
                    "{source}: latent OWA {:.4} vs best direct {} OWA {:.4}, ratio {:.4} (need <= {OWA_RATIO_MAX}); {:.2?} (budget {:?})",
                    b.pipeline_owa.unwrap_or(f64::NAN),
                    best.map_or("-", |r| r.method.as_str()),
                    best.and_then(|r| r.owa).unwrap_or(f64::NAN),
                    ratio,
                    elapsed,
                    PANEL_BUDGET
                ),
            )
        }
        Err(e) => outcome(false, format!("{source}: pipeline failed: {e}")),
    }
}

// ---------------------------------------------------------------------------

fn write_panel(dir: &Path) -> RunConfig {
    let panel = synthetic::latent_panel(&PanelConfig {
        n_series: 120,
        n_latent: 6,
        seed: 8,
        ..PanelConfig::default()
    });
    let data = dir.join("panel.csv");
    io::write_series(io::create(&data).unwrap(), &panel.data).unwrap();
    let mut config = RunConfig::for_data(&data);
    config.trmf.rank = 6;
    config.seed = 8;
    config
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_panel(dir.path());
    config.output.dir = dir.path().join("out");
    match pipeline::run(&config) {
        Ok(o) => outcome(
            o.violations.is_empty() && o.access_reads > 0,
            format!(
                "full pipeline run with benchmarks: {} audited reads, {} violations",
                o.access_reads,
                o.violations.len()
            ),
        ),
        Err(e) => outcome(false, format!("pipeline run failed: {e}")),
    }
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let base = write_panel(dir.path());
    let mut outputs = Vec::new();
    for name in ["first", "second"] {
        let mut config = base.clone();
        config.output.dir = dir.path().join(name);
        if let Err(e) = pipeline::run(&config) {
            return outcome(false, format!("run {name} failed: {e}"));
        }
        let forecasts = std::fs::read(config.output.dir.join("forecasts.csv")).unwrap();
        let latent = std::fs::read(config.output.dir.join("latent_forecast.csv")).unwrap();
        outputs.push((forecasts, latent));
    }
    let same = outputs[0] == outputs[1];
    outcome(
        same,
        format!(
            "two runs with identical config and seed: forecasts.csv ({} bytes) and latent_forecast.csv {}",
            outputs[0].0.len(),
            if same { "byte-identical" } else { "differ" }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("metric oracle equivalence", criterion_1),
        ("solver monotonicity", criterion_2),
        ("SVD equivalence", criterion_3),
        ("rank recovery", criterion_4),
        ("selection correctness", criterion_5),
        ("latent vs direct OWA", criterion_6),
        ("no leakage", criterion_7),
        ("determinism", criterion_8),
    ];
    let only: Option<usize> = std::env::var("LATENTCAST_CRITERION").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|c| c != i + 1) {
            continue;
        }
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} [{name}]: {} - {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
