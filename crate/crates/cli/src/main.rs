//! `latentcast` command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use latentcast::audit::AccessLog;
use latentcast::evaluation::Reference;
use latentcast::linalg::Matrix;
use latentcast::pipeline::{self, RankMode, RunConfig, Stopwatch};
use latentcast::selection::{self, RankMetric};
use latentcast::synthetic::{self, PanelConfig};
use latentcast::io;

#[derive(Parser, Debug)]
#[command(name = "latentcast", version, about = "Forecast panels of short time series through a low-rank latent factorization")]
struct Cli {
    /// Seed for every randomized step (overrides the config's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: one per CPU).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (overrides the config's `output.dir`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full pipeline: split, factorize, cross-validate, forecast, evaluate,
    /// benchmark, and write every artifact.
    Run {
        #[command(flatten)]
        data: DataArgs,
        /// Skip the latent-vs-direct benchmark.
        #[arg(long)]
        no_benchmark: bool,
    },
    /// Fit the factorization on the training window and write model.json,
    /// scaling.json and latent.csv.
    Factorize {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Reconstruction error for every candidate rank, and the elbow pick.
    RankSweep {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated ascending candidate ranks (default: config grid).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
    },
    /// Cross-validate the method menu on latent series (e.g. a latent.csv
    /// from `factorize`) and optionally forecast them.
    Cv {
        /// Latent series CSV (one row per latent series).
        #[arg(long)]
        latent: PathBuf,
        /// Config file supplying `[cv]`, `methods` and `data.period`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seasonal period (default 12).
        #[arg(long)]
        period: Option<usize>,
        /// Ranking metric: mae, smape or smape_abs.
        #[arg(long, value_parser = parse_metric)]
        metric: Option<RankMetric>,
        /// Also write median-of-top-3 forecasts of this length.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Score a forecast CSV against the held-out window of the dataset.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        /// Forecast CSV with header `id,F1,...,Fh`.
        #[arg(long)]
        forecasts: PathBuf,
        /// Label stored in the report.
        #[arg(long, default_value = "forecasts")]
        method: String,
    },
    /// Compare the latent pipeline with every menu method applied directly
    /// to the original series.
    Benchmark {
        #[command(flatten)]
        data: DataArgs,
        /// Skip the direct per-series cross-validation baseline.
        #[arg(long)]
        no_direct_cv: bool,
    },
    /// Write a synthetic panel built from shared latent processes, plus its
    /// category metadata.
    Synthesize {
        #[arg(long, default_value_t = 500)]
        series: usize,
        #[arg(long, default_value_t = 18)]
        latent: usize,
        #[arg(long, default_value_t = 72)]
        length: usize,
        #[arg(long, default_value_t = 12)]
        period: usize,
        /// Noise standard deviation relative to each series' level.
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
    },
}

/// Where the data and settings come from: a config file, a data file, or
/// both (flags override the file).
#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Series CSV (M4 format).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Category metadata CSV (id, category).
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Seasonal period (default 12).
    #[arg(long)]
    period: Option<usize>,
    /// Held-out test length.
    #[arg(long)]
    horizon: Option<usize>,
    /// Training points kept before the test window.
    #[arg(long)]
    max_train: Option<usize>,
    /// Latent dimension K (implies fixed rank mode).
    #[arg(long, conflicts_with = "elbow")]
    rank: Option<usize>,
    /// Pick K by an elbow sweep over the configured grid.
    #[arg(long)]
    elbow: bool,
    /// Cross-validation ranking metric: mae, smape or smape_abs.
    #[arg(long, value_parser = parse_metric)]
    metric: Option<RankMetric>,
}

fn parse_metric(s: &str) -> Result<RankMetric, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown metric {s:?} (expected mae, smape or smape_abs)"))
}

struct Globals {
    seed: Option<u64>,
    output: Option<PathBuf>,
}

impl DataArgs {
    fn config(&self, globals: &Globals) -> Result<RunConfig> {
        let mut config = match (&self.config, &self.data) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(data)) => RunConfig::for_data(data),
            (None, None) => bail!("either --config or --data is required"),
        };
        if let Some(d) = &self.data {
            config.data.path = d.clone();
        }
        if let Some(m) = &self.metadata {
            config.data.metadata = Some(m.clone());
        }
        if let Some(p) = self.period {
            config.data.period = p;
        }
        if let Some(h) = self.horizon {
            config.split.horizon = h;
        }
        if let Some(t) = self.max_train {
            config.split.max_train = t;
        }
        if let Some(k) = self.rank {
            config.trmf.rank = k;
            config.rank.mode = RankMode::Fixed;
        }
        if self.elbow {
            config.rank.mode = RankMode::Elbow;
        }
        if let Some(m) = self.metric {
            config.cv.metric = m;
        }
        apply_globals(&mut config, globals);
        config.validate()?;
        Ok(config)
    }
}

fn apply_globals(config: &mut RunConfig, globals: &Globals) {
    if let Some(s) = globals.seed {
        config.seed = s;
    }
    if let Some(o) = &globals.output {
        config.output.dir = o.clone();
    }
}

fn output_dir(globals: &Globals) -> PathBuf {
    globals.output.clone().unwrap_or_else(|| PathBuf::from("latentcast-out"))
}

fn report_artifacts(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |v| format!("{v:.4}"))
}

fn cmd_run(config: &RunConfig, no_benchmark: bool) -> Result<()> {
    let mut config = config.clone();
    if no_benchmark {
        config.benchmark.enabled = false;
    }
    let outcome = pipeline::run(&config)?;
    let agg = &outcome.eval.aggregate;
    println!(
        "{} series ({} rejected), K = {}, horizon {}",
        outcome.prepared.train.n_series(),
        outcome.prepared.rejected.len(),
        outcome.factorization.model.rank(),
        config.split.horizon
    );
    println!(
        "latent pipeline: sMAPE {:.4}  MASE {}  OWA {}  ({} Naive2 fallbacks)",
        agg.smape,
        fmt_opt(agg.mase),
        fmt_opt(outcome.eval.owa()),
        agg.n_fallback
    );
    if config.benchmark.enabled {
        print!("{}", outcome.benchmark.table());
        if let (Some(best), Some(ratio)) = (&outcome.benchmark.best_direct, outcome.benchmark.owa_ratio) {
            println!("best direct: {} (OWA {}); ratio {ratio:.4}", best.method, fmt_opt(best.owa));
        }
    }
    println!("audited reads: {}, leakage violations: {}", outcome.access_reads, outcome.violations.len());
    report_artifacts(&outcome.artifacts);
    Ok(())
}

fn cmd_factorize(config: &RunConfig) -> Result<()> {
    let prepared = pipeline::prepare(config)?;
    let fact = pipeline::factorize(&prepared.train, config)?;
    let model = &fact.model;
    if let Some(pick) = fact.pick {
        println!("elbow pick: K = {} (distance {:.4})", pick.k, pick.distance);
    }
    println!(
        "K = {}, {} iterations, converged: {}, final objective {:.6e}",
        model.rank(),
        model.objective_trace.len(),
        model.converged,
        model.objective_trace.last().copied().unwrap_or(f64::NAN)
    );
    let scaled = fact.standardizer.apply(&prepared.train);
    let err = model.reconstruction_error(&scaled)?;
    println!("reconstruction MASE {:.6} ({} degenerate series)", err.aggregate, err.degenerate);
    let paths = pipeline::write_factorization(&config.output.dir, &fact, prepared.train.period())?;
    report_artifacts(&paths);
    Ok(())
}

fn cmd_rank_sweep(config: &RunConfig, grid: Option<Vec<usize>>) -> Result<()> {
    let prepared = pipeline::prepare(config)?;
    let mut config = config.clone();
    if let Some(g) = grid {
        config.rank.grid = g;
    }
    config.rank.mode = RankMode::Elbow;
    let fact = pipeline::factorize(&prepared.train, &config)?;
    let curve = fact.curve.as_ref().expect("elbow mode produces a curve");
    let pick = fact.pick.expect("elbow mode produces a pick");
    println!("{:>4} {:>14}", "K", "recon MASE");
    for (k, e) in curve.ks.iter().zip(&curve.errors) {
        let mark = if *k == pick.k { "  <- elbow" } else { "" };
        println!("{k:>4} {e:>14.6}{mark}");
    }
    if pick.flat {
        println!("curve is flat; taking the smallest candidate");
    }
    pipeline::ensure_dir(&config.output.dir)?;
    let path = config.output.dir.join("elbow.csv");
    curve
        .write_csv(io::create(&path)?)
        .with_context(|| format!("writing {}", path.display()))?;
    report_artifacts(&[path]);
    Ok(())
}

fn cmd_cv(
    latent_path: &Path,
    config_path: Option<&Path>,
    period: Option<usize>,
    metric: Option<RankMetric>,
    horizon: Option<usize>,
    globals: &Globals,
) -> Result<()> {
    let mut config = match config_path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::for_data(latent_path),
    };
    apply_globals(&mut config, globals);
    if let Some(p) = period {
        config.data.period = p;
    }
    if let Some(m) = metric {
        config.cv.metric = m;
    }
    let period = config.data.period;
    let series = io::read_series_path(latent_path, period)?;
    if !series.is_fully_observed() {
        bail!("{}: latent series must be fully observed", latent_path.display());
    }
    let rows: Vec<Vec<f64>> = series.rows().map(|r| r.raw().to_vec()).collect();
    let latent = Matrix::from_rows(&rows).context("latent series must have equal lengths")?;
    let menu = config.menu()?;
    let log = AccessLog::new();
    let report = selection::cross_validate(&latent, period, &menu, &config.cv, Some(&log))?;
    if let Some(w) = &report.plan.warning {
        eprintln!("warning: {w}");
    }
    for l in &report.latents {
        println!("{}: top {}", l.latent_id, l.top.join(", "));
    }
    let mut paths = pipeline::write_cv(&config.output.dir, &report)?;
    if let Some(h) = horizon {
        let (forecast, _) = selection::forecast_latents(&latent, period, &report, &menu, h, config.cv.top)?;
        paths.push(pipeline::write_latent(&config.output.dir.join("latent_forecast.csv"), &forecast, period)?);
    }
    let violations = log.violations();
    if !violations.is_empty() {
        bail!("leakage audit failed: {violations:?}");
    }
    report_artifacts(&paths);
    Ok(())
}

fn cmd_evaluate(config: &RunConfig, forecasts: &Path, method: &str) -> Result<()> {
    let prepared = pipeline::prepare(config)?;
    let (ids, values) = io::read_forecasts_path(forecasts)?;
    let h = prepared.test.n_cols();
    if values.cols() != h {
        bail!("{}: forecasts have {} steps but the test window has {h}", forecasts.display(), values.cols());
    }
    let index: std::collections::HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut rows = Vec::with_capacity(prepared.train.n_series());
    for id in prepared.train.ids() {
        let &i = index
            .get(id.as_str())
            .with_context(|| format!("{}: no forecast for series {id:?}", forecasts.display()))?;
        rows.push(values.row(i).to_vec());
    }
    let aligned = Matrix::from_rows(&rows).unwrap_or_else(|| Matrix::zeros(0, h));
    let reference = Reference::new(&prepared.train, &prepared.test, prepared.categories.as_ref())?;
    let report = reference.evaluate(method, &aligned, &[])?;
    let agg = &report.aggregate;
    println!(
        "{method}: sMAPE {:.4}  MASE {}  OWA {}  over {} series ({} degenerate)",
        agg.smape,
        fmt_opt(agg.mase),
        fmt_opt(report.owa()),
        agg.n_series,
        agg.n_degenerate
    );
    for c in &report.categories {
        println!(
            "  {:<12} sMAPE {:.4}  OWA {}  ({} series)",
            c.category,
            c.aggregate.smape,
            fmt_opt(c.aggregate.owa.map(|o| o.owa)),
            c.aggregate.n_series
        );
    }
    pipeline::ensure_dir(&config.output.dir)?;
    let path = config.output.dir.join("eval.json");
    fs::write(&path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    report_artifacts(&[path]);
    Ok(())
}

fn cmd_benchmark(config: &RunConfig, no_direct_cv: bool) -> Result<()> {
    let mut config = config.clone();
    config.benchmark.enabled = true;
    if no_direct_cv {
        config.benchmark.direct_cv = false;
    }
    let mut watch = Stopwatch::start();
    let prepared = pipeline::prepare(&config)?;
    watch.lap("ingest");
    let outcome = pipeline::run_prepared(&config, prepared, watch, false)?;
    let b = &outcome.benchmark;
    print!("{}", b.table());
    if let (Some(best), Some(ratio)) = (&b.best_direct, b.owa_ratio) {
        println!("latent OWA {} vs best direct {} OWA {}: ratio {ratio:.4}", fmt_opt(b.pipeline_owa), best.method, fmt_opt(best.owa));
    }
    for s in &b.stages {
        println!("  {:<18} {:>9.3}s", s.stage, s.seconds);
    }
    pipeline::ensure_dir(&config.output.dir)?;
    let path = config.output.dir.join("benchmark.json");
    fs::write(&path, b.to_json()).with_context(|| format!("writing {}", path.display()))?;
    report_artifacts(&[path]);
    Ok(())
}

fn cmd_synthesize(panel: PanelConfig, dir: &Path) -> Result<()> {
    if panel.n_series == 0 || panel.length == 0 || panel.period == 0 || panel.n_latent == 0 {
        bail!("--series, --latent, --length and --period must be positive");
    }
    if !(panel.noise.is_finite() && panel.noise >= 0.0) {
        bail!("--noise must be finite and non-negative");
    }
    let generated = synthetic::latent_panel(&panel);
    pipeline::ensure_dir(dir)?;
    let data = dir.join("panel.csv");
    io::write_series(io::create(&data)?, &generated.data)?;
    let meta = dir.join("metadata.csv");
    let mut w = io::create(&meta)?;
    writeln!(w, "id,category")?;
    for id in generated.data.ids() {
        writeln!(w, "{id},{}", generated.categories[id])?;
    }
    w.flush()?;
    println!(
        "{} series of length {} from {} latent processes (seed {})",
        panel.n_series, panel.length, panel.n_latent, panel.seed
    );
    report_artifacts(&[data, meta]);
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let globals = Globals {
        seed: cli.seed,
        output: cli.output,
    };
    match cli.command {
        Command::Run { data, no_benchmark } => cmd_run(&data.config(&globals)?, no_benchmark),
        Command::Factorize { data } => cmd_factorize(&data.config(&globals)?),
        Command::RankSweep { data, grid } => cmd_rank_sweep(&data.config(&globals)?, grid),
        Command::Cv {
            latent,
            config,
            period,
            metric,
            horizon,
        } => cmd_cv(&latent, config.as_deref(), period, metric, horizon, &globals),
        Command::Evaluate { data, forecasts, method } => cmd_evaluate(&data.config(&globals)?, &forecasts, &method),
        Command::Benchmark { data, no_direct_cv } => cmd_benchmark(&data.config(&globals)?, no_direct_cv),
        Command::Synthesize {
            series,
            latent,
            length,
            period,
            noise,
        } => cmd_synthesize(
            PanelConfig {
                n_series: series,
                n_latent: latent,
                length,
                period,
                noise,
                seed: globals.seed.unwrap_or(0),
                ..PanelConfig::default()
            },
            &output_dir(&globals),
        ),
    }
}

fn main() -> ExitCode {
    // Exit quietly when stdout is closed early (e.g. piped into `head`).
    #[cfg(unix)]
    // SAFETY: restoring the default disposition of SIGPIPE before any other
    // thread exists.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
