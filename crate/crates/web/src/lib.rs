//! WebAssembly bindings for the browser demo in `www/index.html`.
//!
//! Every exported function takes a series CSV (M4 layout: id, then values)
//! and returns a JSON string. The `*_json` functions hold the logic and
//! are plain Rust, so they are tested natively.

use latentcast::linalg::Matrix;
use latentcast::pipeline::{self, RankMode, RunConfig};
use latentcast::series::SeriesMatrix;
use latentcast::synthetic::{self, PanelConfig};
use latentcast::{io, selection};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Input limits that keep the single-threaded page responsive.
const MAX_SERIES: usize = 2000;
const MAX_LENGTH: usize = 400;
const MAX_RANK: usize = 40;

fn parse_panel(csv: &str, period: u32) -> Result<SeriesMatrix, String> {
    if period == 0 {
        return Err("period must be at least 1".into());
    }
    let panel = io::read_series(csv.as_bytes(), period as usize).map_err(|e| e.to_string())?;
    if panel.n_series() > MAX_SERIES || panel.n_cols() > MAX_LENGTH {
        return Err(format!(
            "the demo accepts at most {MAX_SERIES} series of length {MAX_LENGTH}; got {} x {}",
            panel.n_series(),
            panel.n_cols()
        ));
    }
    Ok(panel)
}

fn config(rank: u32, seed: u32) -> Result<RunConfig, String> {
    if rank == 0 || rank as usize > MAX_RANK {
        return Err(format!("rank must be between 1 and {MAX_RANK}"));
    }
    let mut config = RunConfig::for_data("browser");
    config.trmf.rank = rank as usize;
    config.seed = u64::from(seed);
    Ok(config)
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

/// A synthetic panel in series-CSV form.
pub fn synthesize_csv(n_series: u32, n_latent: u32, noise: f64, seed: u32) -> Result<String, String> {
    if n_series == 0 || n_series as usize > MAX_SERIES || n_latent == 0 || n_latent as usize > MAX_RANK {
        return Err(format!("need 1..={MAX_SERIES} series and 1..={MAX_RANK} latent processes"));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err("noise must be non-negative".into());
    }
    let panel = synthetic::latent_panel(&PanelConfig {
        n_series: n_series as usize,
        n_latent: n_latent as usize,
        noise,
        seed: u64::from(seed),
        ..PanelConfig::default()
    });
    let mut buf = Vec::new();
    io::write_series(&mut buf, &panel.data).map_err(|e| e.to_string())?;
    String::from_utf8(buf).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ElbowOut {
    ks: Vec<usize>,
    errors: Vec<f64>,
    pick: usize,
    flat: bool,
}

/// Reconstruction error for K = 1..=max_rank (capped below min(N, T)) and
/// the elbow pick, on the standardized panel.
pub fn elbow_sweep_json(csv: &str, period: u32, max_rank: u32, seed: u32) -> Result<String, String> {
    let panel = parse_panel(csv, period)?;
    let mut config = config(max_rank.max(1), seed)?;
    let limit = panel.n_series().min(panel.n_cols());
    config.rank.mode = RankMode::Elbow;
    config.rank.grid = (1..=max_rank as usize).filter(|&k| k < limit).collect();
    if config.rank.grid.len() < 3 {
        return Err(format!("need at least 3 candidate ranks below min(N, T) = {limit}"));
    }
    let fact = pipeline::factorize(&panel, &config).map_err(|e| e.to_string())?;
    let curve = fact.curve.expect("elbow mode");
    let pick = fact.pick.expect("elbow mode");
    Ok(to_json(&ElbowOut {
        ks: curve.ks,
        errors: curve.errors,
        pick: pick.k,
        flat: pick.flat,
    }))
}

#[derive(Serialize)]
struct FactorOut {
    rank: usize,
    iterations: usize,
    converged: bool,
    objective_trace: Vec<f64>,
    reconstruction_mase: f64,
    latent: Vec<Vec<f64>>,
    lag_weights: Vec<Vec<f64>>,
}

/// Fits the factorization and returns the latent series and convergence
/// record.
pub fn factorize_json(csv: &str, period: u32, rank: u32, seed: u32) -> Result<String, String> {
    let panel = parse_panel(csv, period)?;
    let config = config(rank, seed)?;
    let fact = pipeline::factorize(&panel, &config).map_err(|e| e.to_string())?;
    let err = fact
        .model
        .reconstruction_error(&fact.standardizer.apply(&panel))
        .map_err(|e| e.to_string())?;
    let model = &fact.model;
    Ok(to_json(&FactorOut {
        rank: model.rank(),
        iterations: model.objective_trace.len(),
        converged: model.converged,
        objective_trace: model.objective_trace.clone(),
        reconstruction_mase: err.aggregate,
        latent: rows(&model.temporal),
        lag_weights: rows(&model.theta),
    }))
}

#[derive(Serialize)]
struct LatentOut {
    id: String,
    top: Vec<String>,
    history: Vec<f64>,
    forecast: Vec<f64>,
}

#[derive(Serialize)]
struct SeriesOut {
    id: String,
    history: Vec<f64>,
    forecast: Vec<f64>,
}

#[derive(Serialize)]
struct ForecastOut {
    rank: usize,
    metric: String,
    latents: Vec<LatentOut>,
    series: Vec<SeriesOut>,
}

/// Factorizes the whole panel, cross-validates the menu on every latent
/// series, and forecasts `horizon` steps past the end of the data.
/// `max_series` limits how many original series are echoed back.
pub fn select_forecast_json(
    csv: &str,
    period: u32,
    rank: u32,
    horizon: u32,
    seed: u32,
    max_series: u32,
) -> Result<String, String> {
    if horizon == 0 || horizon > 60 {
        return Err("horizon must be between 1 and 60".into());
    }
    let panel = parse_panel(csv, period)?;
    let config = config(rank, seed)?;
    let menu = config.menu().map_err(|e| e.to_string())?;
    let fact = pipeline::factorize(&panel, &config).map_err(|e| e.to_string())?;
    let report = pipeline::select(&fact, panel.period(), &menu, &config.cv, None).map_err(|e| e.to_string())?;
    let metric = serde_json::to_value(report.metric).expect("serializable");
    let outcome =
        pipeline::forecast(&fact, &panel, report, &menu, &config.cv, horizon as usize).map_err(|e| e.to_string())?;
    let latents = outcome
        .provenance
        .iter()
        .enumerate()
        .map(|(k, p)| LatentOut {
            id: selection::latent_id(k),
            top: p.members.clone(),
            history: fact.model.temporal.row(k).to_vec(),
            forecast: p.forecast.clone(),
        })
        .collect();
    let series = panel
        .rows()
        .take(max_series as usize)
        .enumerate()
        .map(|(i, view)| SeriesOut {
            id: view.id().to_string(),
            history: view.history(),
            forecast: outcome.forecasts.row(i).to_vec(),
        })
        .collect();
    Ok(to_json(&ForecastOut {
        rank: fact.model.rank(),
        metric: metric.as_str().unwrap_or_default().to_string(),
        latents,
        series,
    }))
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn synthesize(n_series: u32, n_latent: u32, noise: f64, seed: u32) -> Result<String, JsError> {
    js(synthesize_csv(n_series, n_latent, noise, seed))
}

#[wasm_bindgen]
pub fn elbow_sweep(csv: &str, period: u32, max_rank: u32, seed: u32) -> Result<String, JsError> {
    js(elbow_sweep_json(csv, period, max_rank, seed))
}

#[wasm_bindgen]
pub fn factorize(csv: &str, period: u32, rank: u32, seed: u32) -> Result<String, JsError> {
    js(factorize_json(csv, period, rank, seed))
}

#[wasm_bindgen]
pub fn select_forecast(
    csv: &str,
    period: u32,
    rank: u32,
    horizon: u32,
    seed: u32,
    max_series: u32,
) -> Result<String, JsError> {
    js(select_forecast_json(csv, period, rank, horizon, seed, max_series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn panel() -> String {
        synthesize_csv(30, 3, 0.02, 4).unwrap()
    }

    #[test]
    fn synthesized_csv_parses() {
        let csv = panel();
        assert!(csv.starts_with("id,T1,"));
        assert_eq!(csv.lines().count(), 31);
        assert!(synthesize_csv(0, 3, 0.1, 1).is_err());
        assert!(synthesize_csv(10, 3, f64::NAN, 1).is_err());
    }

    #[test]
    fn elbow_sweep_returns_curve_and_pick() {
        let out: Value = serde_json::from_str(&elbow_sweep_json(&panel(), 12, 8, 1).unwrap()).unwrap();
        assert_eq!(out["ks"].as_array().unwrap().len(), 8);
        let pick = out["pick"].as_u64().unwrap();
        assert!((1..=8).contains(&pick));
        assert!(elbow_sweep_json("S1,1,2,3\n", 12, 8, 1).is_err());
    }

    #[test]
    fn factorize_returns_latents() {
        let out: Value = serde_json::from_str(&factorize_json(&panel(), 12, 3, 1).unwrap()).unwrap();
        assert_eq!(out["rank"], 3);
        assert_eq!(out["latent"].as_array().unwrap().len(), 3);
        assert_eq!(out["latent"][0].as_array().unwrap().len(), 72);
        assert!(factorize_json(&panel(), 12, 0, 1).is_err());
        assert!(factorize_json("not,a,number\nS1,x\n", 12, 2, 1).is_err());
    }

    #[test]
    fn select_forecast_is_deterministic() {
        let a = select_forecast_json(&panel(), 12, 3, 12, 7, 5).unwrap();
        assert_eq!(a, select_forecast_json(&panel(), 12, 3, 12, 7, 5).unwrap());
        let out: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(out["metric"], "mae");
        assert_eq!(out["series"].as_array().unwrap().len(), 5);
        assert_eq!(out["series"][0]["forecast"].as_array().unwrap().len(), 12);
        let top = out["latents"][0]["top"].as_array().unwrap();
        assert!(!top.is_empty() && top.len() <= 3);
        assert!(select_forecast_json(&panel(), 12, 3, 0, 7, 5).is_err());
    }
}
