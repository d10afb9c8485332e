//! End-to-end driver: ingest, split, factorize, cross-validate, forecast,
//! evaluate, benchmark against direct per-series forecasting, and write the
//! artifacts.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::audit::{AccessLog, Guarded, HeldOut, Stage, Violation};
use crate::evaluation::{EvalError, EvalReport, Reference};
use crate::forecasters::{fit_predict, MenuError, MethodMenu, MethodSpec};
use crate::io::{self, IoError};
use crate::linalg::Matrix;
use crate::metrics;
use crate::parallel;
use crate::rank::{self, ElbowCurve, ElbowPick, RankError};
use crate::selection::{self, CvReport, CvSettings, LatentForecast, SelectionError};
use crate::series::{self, reconstruct, SeriesError, SeriesMatrix, SplitSpec, Standardizer};
use crate::trmf::{self, TrmfConfig, TrmfError, TrmfModel};

/// Configuration format version understood by this build.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("factorization: {0}")]
    Trmf(#[from] TrmfError),
    #[error("rank selection: {0}")]
    Rank(#[from] RankError),
    #[error("method selection: {0}")]
    Selection(#[from] SelectionError),
    #[error("method menu: {0}")]
    Menu(#[from] MenuError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("{context}: {source}")]
    File { context: String, source: std::io::Error },
    #[error("leakage audit failed: {0:?}")]
    Leakage(Vec<Violation>),
}

fn file_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> PipelineError {
    let context = context.into();
    move |source| PipelineError::File { context, source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// M4-format series CSV.
    pub path: PathBuf,
    /// Optional (id, category) CSV used for report breakdowns.
    #[serde(default)]
    pub metadata: Option<PathBuf>,
    /// Seasonal period (12 for monthly data).
    #[serde(default = "default_period")]
    pub period: usize,
}

fn default_period() -> usize {
    12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RankMode {
    /// Use `trmf.rank`.
    #[default]
    Fixed,
    /// Sweep `rank.grid` and take the elbow.
    Elbow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankConfig {
    pub mode: RankMode,
    pub grid: Vec<usize>,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            mode: RankMode::Fixed,
            grid: rank::default_grid(),
        }
    }
}

/// A menu entry: either a bare name such as `"theta+boxcox"` or a table
/// with `name`, `boxcox` and `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodEntry {
    Name(String),
    Spec(MethodSpec),
}

impl MethodEntry {
    pub fn spec(&self) -> MethodSpec {
        match self {
            Self::Name(s) => MethodSpec::parse(s),
            Self::Spec(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("latentcast-out"),
        }
    }
}

/// Whether and how the direct per-series benchmark is run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub enabled: bool,
    /// Also cross-validate the menu on every original series and score the
    /// median-of-top-3 forecast (one CV per series; the costliest row).
    pub direct_cv: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            direct_cv: true,
        }
    }
}

/// Everything a run needs. Serialized as TOML; see the FORMATS reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub data: DataConfig,
    #[serde(default)]
    pub split: SplitSpec,
    /// Factorization settings. `trmf.seed` is overwritten by `seed`.
    #[serde(default)]
    pub trmf: TrmfConfig,
    #[serde(default)]
    pub rank: RankConfig,
    #[serde(default)]
    pub cv: CvSettings,
    /// Method menu; the built-in menu when absent.
    #[serde(default)]
    pub methods: Option<Vec<MethodEntry>>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub benchmark: BenchmarkConfig,
    /// Standardize every series (mean 0, unit variance over its training
    /// window) before factorization.
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    /// Default configuration for the dataset at `path`.
    pub fn for_data(path: impl Into<PathBuf>) -> Self {
        Self {
            version: CONFIG_VERSION,
            data: DataConfig {
                path: path.into(),
                metadata: None,
                period: default_period(),
            },
            split: SplitSpec::default(),
            trmf: TrmfConfig::default(),
            rank: RankConfig::default(),
            cv: CvSettings::default(),
            methods: None,
            output: OutputConfig::default(),
            benchmark: BenchmarkConfig::default(),
            standardize: true,
            seed: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let config: Self = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        if config.version != CONFIG_VERSION {
            return Err(PipelineError::Config(format!(
                "unsupported config version {} (this build reads version {CONFIG_VERSION})",
                config.version
            )));
        }
        Ok(config)
    }

    /// Loads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(file_err(path.display().to_string()))?;
        let mut config = Self::from_toml(&text).map_err(|e| match e {
            PipelineError::Config(m) => PipelineError::Config(format!("{}: {m}", path.display())),
            e => e,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.data.path);
        if let Some(m) = config.data.metadata.as_mut() {
            resolve(m);
        }
        resolve(&mut config.output.dir);
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn menu(&self) -> Result<MethodMenu, PipelineError> {
        Ok(match &self.methods {
            None => MethodMenu::standard(),
            Some(entries) => MethodMenu::from_specs(&entries.iter().map(MethodEntry::spec).collect::<Vec<_>>())?,
        })
    }

    /// Factorization settings with the run seed applied.
    pub fn trmf_config(&self) -> TrmfConfig {
        TrmfConfig {
            seed: self.seed,
            ..self.trmf.clone()
        }
    }

    /// Checks everything that can be checked without reading data.
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.split.validate_for_period(self.data.period)?;
        self.trmf.validate()?;
        self.cv.validate()?;
        self.menu()?;
        if self.rank.mode == RankMode::Elbow && self.rank.grid.len() < 3 {
            return Err(RankError::TooFewPoints(self.rank.grid.len()).into());
        }
        for (what, p) in [("data.path", Some(&self.data.path)), ("data.metadata", self.data.metadata.as_ref())] {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(PipelineError::Config(format!("{what} {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }
}

/// Elapsed time of each pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

/// Consecutive stage timer: each lap covers the time since the previous
/// lap, so the laps add up to the wall-clock total.
#[derive(Debug)]
pub struct Stopwatch {
    start: Instant,
    last: Instant,
    stages: Vec<StageTime>,
}

impl Stopwatch {
    pub fn start() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            stages: Vec::new(),
        }
    }

    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.stages.push(StageTime {
            stage: stage.to_string(),
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }

    pub fn total(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn stages(&self) -> &[StageTime] {
        &self.stages
    }
}

/// A series-level problem that did not stop the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub id: String,
    pub stage: String,
    pub message: String,
}

/// Ingested and split data.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: SeriesMatrix,
    pub test: SeriesMatrix,
    pub categories: Option<HashMap<String, String>>,
    /// Series that could not be split, with the reason.
    pub rejected: Vec<Failure>,
}

/// Reads the dataset and metadata and applies the train/test split.
/// Series that cannot be split are dropped and listed.
pub fn prepare(config: &RunConfig) -> Result<Prepared, PipelineError> {
    let data = io::read_series_path(&config.data.path, config.data.period)?;
    let categories = config.data.metadata.as_deref().map(io::read_metadata_path).transpose()?;
    prepare_matrix(&data, &config.split, categories)
}

/// Splits an in-memory panel.
pub fn prepare_matrix(
    data: &SeriesMatrix,
    spec: &SplitSpec,
    categories: Option<HashMap<String, String>>,
) -> Result<Prepared, PipelineError> {
    spec.validate_for_period(data.period())?;
    let split = series::split_lenient(data, spec)?;
    let rejected = split
        .rejected
        .into_iter()
        .map(|(id, e)| Failure {
            id,
            stage: "split".into(),
            message: e.to_string(),
        })
        .collect();
    Ok(Prepared {
        train: split.train,
        test: split.test,
        categories,
        rejected,
    })
}

/// Factorization of the (optionally standardized) training panel.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub standardizer: Standardizer,
    pub model: TrmfModel,
    pub curve: Option<ElbowCurve>,
    pub pick: Option<ElbowPick>,
}

impl Factorization {
    /// Fitted panel `FᵀX` in original units.
    pub fn fitted(&self) -> Matrix {
        self.standardizer.invert(&self.model.reconstruct())
    }
}

/// Picks K (fixed or elbow) and fits the factorization.
pub fn factorize(train: &SeriesMatrix, config: &RunConfig) -> Result<Factorization, PipelineError> {
    let standardizer = if config.standardize {
        Standardizer::fit(train)
    } else {
        Standardizer::identity(train.n_series())
    };
    let scaled = standardizer.apply(train);
    let mut trmf_config = config.trmf_config();
    let (curve, pick) = match config.rank.mode {
        RankMode::Fixed => (None, None),
        RankMode::Elbow => {
            let limit = scaled.n_series().min(scaled.n_cols());
            let grid: Vec<usize> = config.rank.grid.iter().copied().filter(|&k| k < limit).collect();
            let curve = rank::sweep(&scaled, &grid, &trmf_config)?;
            let pick = rank::pick_elbow(&curve)?;
            trmf_config.rank = pick.k;
            (Some(curve), Some(pick))
        }
    };
    let model = trmf::fit(&scaled, &trmf_config)?;
    Ok(Factorization {
        standardizer,
        model,
        curve,
        pick,
    })
}

/// Latent-pipeline forecasts in original units.
#[derive(Debug, Clone)]
pub struct LatentOutcome {
    pub report: CvReport,
    /// K×h ensemble forecasts of the latent series.
    pub latent: Matrix,
    pub provenance: Vec<LatentForecast>,
    /// N×h forecasts in original units.
    pub forecasts: Matrix,
    /// Series whose forecast was replaced by Naive2.
    pub fallback: Vec<bool>,
    pub failures: Vec<Failure>,
}

/// Replaces non-finite forecast rows by Naive2 on the series' history.
fn repair(
    forecasts: &mut Matrix,
    train: &SeriesMatrix,
    stage: &str,
    fallback: &mut [bool],
    failures: &mut Vec<Failure>,
) -> Result<(), PipelineError> {
    let h = forecasts.cols();
    for (i, view) in train.rows().enumerate() {
        if forecasts.row(i).iter().all(|v| v.is_finite()) {
            continue;
        }
        let naive2 = metrics::naive2(&view.history(), train.period(), h)
            .map_err(|e| PipelineError::Config(format!("series {}: {e}", view.id())))?;
        forecasts.row_mut(i).copy_from_slice(&naive2);
        fallback[i] = true;
        failures.push(Failure {
            id: view.id().to_string(),
            stage: stage.to_string(),
            message: "non-finite forecast replaced by Naive2".into(),
        });
    }
    Ok(())
}

/// Cross-validates the menu on the latent series.
pub fn select(
    fact: &Factorization,
    period: usize,
    menu: &MethodMenu,
    cv: &CvSettings,
    log: Option<&AccessLog>,
) -> Result<CvReport, PipelineError> {
    Ok(selection::cross_validate(&fact.model.temporal, period, menu, cv, log)?)
}

/// Ensembles the latent forecasts and maps them back to the panel.
pub fn forecast(
    fact: &Factorization,
    train: &SeriesMatrix,
    report: CvReport,
    menu: &MethodMenu,
    cv: &CvSettings,
    horizon: usize,
) -> Result<LatentOutcome, PipelineError> {
    let (latent, provenance) =
        selection::forecast_latents(&fact.model.temporal, train.period(), &report, menu, horizon, cv.top)?;
    let scaled = reconstruct(&fact.model.factors, &latent)?;
    let mut forecasts = fact.standardizer.invert(&scaled);
    let mut fallback = vec![false; train.n_series()];
    let mut failures = Vec::new();
    repair(&mut forecasts, train, "forecast", &mut fallback, &mut failures)?;
    Ok(LatentOutcome {
        report,
        latent,
        provenance,
        forecasts,
        fallback,
        failures,
    })
}

/// One row of the latent-versus-direct comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    /// `direct` (per original series), `latent` (through the
    /// factorization) or `reference`.
    pub approach: String,
    pub method: String,
    pub smape: f64,
    pub mase: Option<f64>,
    pub owa: Option<f64>,
    /// Series (direct) or latent series (latent) where the method failed
    /// and a fallback was used.
    pub n_fallback: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_series: usize,
    pub n_rejected: usize,
    pub train_columns: usize,
    pub horizon: usize,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub dataset: DatasetSummary,
    pub rank: usize,
    pub rank_pick: Option<ElbowPick>,
    pub rows: Vec<BenchmarkRow>,
    /// OWA of the latent median-of-top-3 pipeline.
    pub pipeline_owa: Option<f64>,
    /// The single menu method with the lowest direct OWA.
    pub best_direct: Option<BenchmarkRow>,
    /// `pipeline_owa / best_direct.owa`.
    pub owa_ratio: Option<f64>,
    pub stages: Vec<StageTime>,
    pub wall_seconds: f64,
    pub failures: Vec<Failure>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Plain-text table of the rows.
    pub fn table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        let mut out = format!(
            "{:<10} {:<22} {:>9} {:>8} {:>8} {:>9}\n",
            "approach", "method", "sMAPE", "MASE", "OWA", "fallback"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10} {:<22} {:>9.4} {:>8} {:>8} {:>9}\n",
                r.approach,
                r.method,
                r.smape,
                fmt(r.mase),
                fmt(r.owa),
                r.n_fallback
            ));
        }
        out
    }
}

fn row(approach: &str, method: &str, report: &EvalReport, n_fallback: usize) -> BenchmarkRow {
    BenchmarkRow {
        approach: approach.to_string(),
        method: method.to_string(),
        smape: report.aggregate.smape,
        mase: report.aggregate.mase,
        owa: report.owa(),
        n_fallback,
    }
}

/// Each menu method applied directly to every original series. Series
/// where the method fails get Naive2.
fn direct_rows(
    train: &SeriesMatrix,
    reference: &Reference,
    menu: &MethodMenu,
    log: &AccessLog,
) -> Result<Vec<BenchmarkRow>, PipelineError> {
    let period = train.period();
    let h = reference.horizon();
    let naive2 = reference.naive2_forecasts();
    let histories: Vec<(String, Vec<f64>)> = train.rows().map(|r| (r.id().to_string(), r.history())).collect();
    let mut rows = Vec::new();
    for method in menu.iter() {
        let results = parallel::map(&histories, |(id, hist)| {
            let window = Guarded::new(hist, id, Some(log)).window(hist.len(), hist.len());
            fit_predict(method, window, period, h).ok()
        });
        let mut forecasts = Matrix::zeros(histories.len(), h);
        let mut fallback = vec![false; histories.len()];
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Some(f) => forecasts.row_mut(i).copy_from_slice(&f),
                None => {
                    forecasts.row_mut(i).copy_from_slice(naive2.row(i));
                    fallback[i] = true;
                }
            }
        }
        let report = reference.evaluate(method.name(), &forecasts, &fallback)?;
        rows.push(row("direct", method.name(), &report, report.aggregate.n_fallback));
    }
    Ok(rows)
}

/// Median-of-top-3 selected by cross-validation on each original series.
fn direct_cv_row(
    train: &SeriesMatrix,
    reference: &Reference,
    menu: &MethodMenu,
    cv: &CvSettings,
    log: &AccessLog,
) -> Result<BenchmarkRow, PipelineError> {
    let period = train.period();
    let h = reference.horizon();
    let naive2 = reference.naive2_forecasts();
    let histories: Vec<(String, Vec<f64>)> = train.rows().map(|r| (r.id().to_string(), r.history())).collect();
    let results = parallel::map(&histories, |(id, hist)| {
        let plan = selection::plan_folds(hist.len(), cv.fold_length, cv.min_train).ok()?;
        let ranking = selection::rank_methods(Guarded::new(hist, id, Some(log)), period, menu, &plan, cv.metric, cv.top);
        selection::ensemble_forecast(hist, period, &ranking, menu, h, cv.top).ok()
    });
    let mut forecasts = Matrix::zeros(histories.len(), h);
    let mut fallback = vec![false; histories.len()];
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Some(f) => forecasts.row_mut(i).copy_from_slice(&f.forecast),
            None => {
                forecasts.row_mut(i).copy_from_slice(naive2.row(i));
                fallback[i] = true;
            }
        }
    }
    let report = reference.evaluate("cv_median_top3", &forecasts, &fallback)?;
    Ok(row("direct", "cv_median_top3", &report, report.aggregate.n_fallback))
}

/// Latent-side rows: CV top-1, every menu method applied to all latent
/// series, and the factorization's own autoregressive forecast.
fn latent_rows(
    fact: &Factorization,
    outcome: &LatentOutcome,
    train: &SeriesMatrix,
    reference: &Reference,
    menu: &MethodMenu,
) -> Result<Vec<BenchmarkRow>, PipelineError> {
    let period = train.period();
    let h = reference.horizon();
    let x = &fact.model.temporal;
    let k = x.rows();
    let to_panel = |latent: &Matrix| -> Result<(Matrix, Vec<bool>, usize), PipelineError> {
        let mut f = fact.standardizer.invert(&reconstruct(&fact.model.factors, latent)?);
        let mut fallback = vec![false; train.n_series()];
        let mut failures = Vec::new();
        repair(&mut f, train, "benchmark", &mut fallback, &mut failures)?;
        Ok((f, fallback, failures.len()))
    };
    let mut rows = Vec::new();

    let mut top1 = Matrix::zeros(k, h);
    let mut top1_fallback = 0;
    for (j, ranking) in outcome.report.latents.iter().enumerate() {
        let one = selection::ensemble_forecast(x.row(j), period, ranking, menu, h, 1);
        match one {
            Ok(f) => top1.row_mut(j).copy_from_slice(&f.forecast),
            Err(_) => {
                top1.row_mut(j).copy_from_slice(outcome.latent.row(j));
                top1_fallback += 1;
            }
        }
    }
    let (f, fb, _) = to_panel(&top1)?;
    let report = reference.evaluate("cv_top1", &f, &fb)?;
    rows.push(row("latent", "cv_top1", &report, top1_fallback));

    for method in menu.iter() {
        let mut latent = Matrix::zeros(k, h);
        let mut n_fallback = 0;
        for j in 0..k {
            let hist = x.row(j);
            match fit_predict(method, hist, period, h) {
                Ok(f) => latent.row_mut(j).copy_from_slice(&f),
                Err(_) => {
                    // Last-value naive on the latent series.
                    latent.row_mut(j).fill(hist[hist.len() - 1]);
                    n_fallback += 1;
                }
            }
        }
        let (f, fb, _) = to_panel(&latent)?;
        let report = reference.evaluate(method.name(), &f, &fb)?;
        rows.push(row("latent", method.name(), &report, n_fallback));
    }

    let ar = fact.model.ar_forecast(h)?;
    let (f, fb, n) = to_panel(&ar)?;
    let report = reference.evaluate("trmf_ar", &f, &fb)?;
    rows.push(row("latent", "trmf_ar", &report, n));
    Ok(rows)
}

/// Result of a complete run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub prepared: Prepared,
    pub factorization: Factorization,
    pub latent: LatentOutcome,
    pub eval: EvalReport,
    pub benchmark: BenchmarkReport,
    pub access_reads: usize,
    pub violations: Vec<Violation>,
    pub artifacts: Vec<PathBuf>,
}

/// Runs the whole pipeline on the configured dataset and writes every
/// artifact into the output directory.
pub fn run(config: &RunConfig) -> Result<RunOutcome, PipelineError> {
    let mut watch = Stopwatch::start();
    config.validate()?;
    let data = io::read_series_path(&config.data.path, config.data.period)?;
    let categories = config.data.metadata.as_deref().map(io::read_metadata_path).transpose()?;
    watch.lap("ingest");
    let prepared = prepare_matrix(&data, &config.split, categories)?;
    watch.lap("split");
    run_prepared(config, prepared, watch, true)
}

/// Runs the pipeline on already split data. With `write` false nothing is
/// written to disk.
pub fn run_prepared(
    config: &RunConfig,
    prepared: Prepared,
    mut watch: Stopwatch,
    write: bool,
) -> Result<RunOutcome, PipelineError> {
    let log = AccessLog::new();
    let menu = config.menu()?;
    let period = prepared.train.period();
    let horizon = config.split.horizon;
    let held_out = HeldOut::new(prepared.test.clone(), &log);

    let fact = factorize(&prepared.train, config)?;
    watch.lap("factorize");
    let report = select(&fact, period, &menu, &config.cv, Some(&log))?;
    watch.lap("select");
    let latent = forecast(&fact, &prepared.train, report, &menu, &config.cv, horizon)?;
    watch.lap("forecast");

    let test = held_out.open(Stage::Evaluate);
    let reference = Reference::new(&prepared.train, test, prepared.categories.as_ref())?;
    let eval = reference.evaluate("latent_cv_median_top3", &latent.forecasts, &latent.fallback)?;
    watch.lap("evaluate");

    let mut rows = vec![row(
        "reference",
        "naive2",
        &reference.evaluate("naive2", &reference.naive2_forecasts(), &[])?,
        0,
    )];
    rows.push(row("latent", "cv_median_top3", &eval, eval.aggregate.n_fallback));
    if config.benchmark.enabled {
        rows.extend(latent_rows(&fact, &latent, &prepared.train, &reference, &menu)?);
        watch.lap("benchmark_latent");
        rows.extend(direct_rows(&prepared.train, &reference, &menu, &log)?);
        if config.benchmark.direct_cv {
            rows.push(direct_cv_row(&prepared.train, &reference, &menu, &config.cv, &log)?);
        }
        watch.lap("benchmark_direct");
    }
    let menu_names = menu.names();
    let best_direct = rows
        .iter()
        .filter(|r| r.approach == "direct" && menu_names.contains(&r.method.as_str()))
        .filter(|r| r.owa.is_some())
        .min_by(|a, b| a.owa.unwrap().total_cmp(&b.owa.unwrap()))
        .cloned();
    let pipeline_owa = eval.owa();
    let owa_ratio = match (pipeline_owa, best_direct.as_ref().and_then(|b| b.owa)) {
        (Some(p), Some(b)) if b > 0.0 => Some(p / b),
        _ => None,
    };
    let mut failures = prepared.rejected.clone();
    failures.extend(latent.failures.iter().cloned());
    let mut benchmark = BenchmarkReport {
        dataset: DatasetSummary {
            n_series: prepared.train.n_series(),
            n_rejected: prepared.rejected.len(),
            train_columns: prepared.train.n_cols(),
            horizon,
            period,
        },
        rank: fact.model.rank(),
        rank_pick: fact.pick,
        rows,
        pipeline_owa,
        best_direct,
        owa_ratio,
        stages: Vec::new(),
        wall_seconds: 0.0,
        failures,
    };
    let violations = log.violations();
    let mut outcome = RunOutcome {
        prepared,
        factorization: fact,
        latent,
        eval,
        benchmark: benchmark.clone(),
        access_reads: log.reads(),
        violations,
        artifacts: Vec::new(),
    };
    if write {
        outcome.artifacts = write_artifacts(&config.output.dir, &outcome)?;
        watch.lap("write");
    }
    benchmark.stages = watch.stages().to_vec();
    benchmark.wall_seconds = watch.total();
    outcome.benchmark = benchmark;
    if write {
        let path = config.output.dir.join("benchmark.json");
        fs::write(&path, outcome.benchmark.to_json()).map_err(file_err(path.display().to_string()))?;
        outcome.artifacts.push(path);
    }
    if !outcome.violations.is_empty() {
        return Err(PipelineError::Leakage(outcome.violations));
    }
    Ok(outcome)
}

/// Creates `dir` if needed.
pub fn ensure_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(file_err(format!("creating {}", dir.display())))
}

/// Latent series as a panel with ids `L1..LK`.
pub fn latent_matrix(x: &Matrix, period: usize) -> SeriesMatrix {
    let ids = (0..x.rows()).map(selection::latent_id).collect();
    SeriesMatrix::from_dense(ids, x, period).expect("latent series are finite")
}

/// Writes a latent K×T matrix in series-CSV format.
pub fn write_latent(path: &Path, x: &Matrix, period: usize) -> Result<PathBuf, PipelineError> {
    io::write_series(io::create(path)?, &latent_matrix(x, period))?;
    Ok(path.to_path_buf())
}

/// Writes the factorization (`model.json`, `scaling.json`, `latent.csv`,
/// and `elbow.csv` when a sweep ran).
pub fn write_factorization(dir: &Path, fact: &Factorization, period: usize) -> Result<Vec<PathBuf>, PipelineError> {
    ensure_dir(dir)?;
    let mut out = Vec::new();
    let model = dir.join("model.json");
    fs::write(&model, fact.model.to_json()).map_err(file_err(model.display().to_string()))?;
    out.push(model);
    let scaling = dir.join("scaling.json");
    let json = serde_json::to_string_pretty(&fact.standardizer).expect("scaling serializes");
    fs::write(&scaling, json).map_err(file_err(scaling.display().to_string()))?;
    out.push(scaling);
    out.push(write_latent(&dir.join("latent.csv"), &fact.model.temporal, period)?);
    if let Some(curve) = &fact.curve {
        let path = dir.join("elbow.csv");
        curve
            .write_csv(io::create(&path)?)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        out.push(path);
    }
    Ok(out)
}

/// Writes `cv_scores.csv` and `cv_summary.json`.
pub fn write_cv(dir: &Path, report: &CvReport) -> Result<Vec<PathBuf>, PipelineError> {
    ensure_dir(dir)?;
    let csv_path = dir.join("cv_scores.csv");
    report
        .write_csv(io::create(&csv_path)?)
        .map_err(|e| PipelineError::Config(format!("{}: {e}", csv_path.display())))?;
    let json_path = dir.join("cv_summary.json");
    fs::write(&json_path, report.to_json()).map_err(file_err(json_path.display().to_string()))?;
    Ok(vec![csv_path, json_path])
}

fn write_artifacts(dir: &Path, outcome: &RunOutcome) -> Result<Vec<PathBuf>, PipelineError> {
    ensure_dir(dir)?;
    let period = outcome.prepared.train.period();
    let mut out = Vec::new();
    let forecasts = dir.join("forecasts.csv");
    io::write_forecasts(io::create(&forecasts)?, outcome.prepared.train.ids(), &outcome.latent.forecasts)?;
    out.push(forecasts);
    out.extend(write_factorization(dir, &outcome.factorization, period)?);
    out.push(write_latent(&dir.join("latent_forecast.csv"), &outcome.latent.latent, period)?);
    out.extend(write_cv(dir, &outcome.latent.report)?);
    let eval = dir.join("eval.json");
    fs::write(&eval, outcome.eval.to_json()).map_err(file_err(eval.display().to_string()))?;
    out.push(eval);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{latent_panel, PanelConfig};

    #[test]
    fn config_round_trips_and_rejects_unknown_keys() {
        let text = r#"
version = 1
seed = 3
methods = ["mean", "naive", "theta+boxcox", { name = "holt_damped", params = { phi = 0.9 } }]

[data]
path = "train.csv"

[trmf]
rank = 4

[rank]
mode = "elbow"
grid = [2, 4, 6]

[cv]
metric = "smape"
"#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.trmf.rank, 4);
        assert_eq!(c.trmf_config().seed, 3);
        assert_eq!(c.rank.mode, RankMode::Elbow);
        assert_eq!(c.cv.metric, selection::RankMetric::Smape);
        assert_eq!(c.menu().unwrap().names(), vec!["mean", "naive", "theta_boxcox", "holt_damped"]);
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert!(RunConfig::from_toml("version = 2\n[data]\npath = \"x\"\n").is_err());
        assert!(RunConfig::from_toml("version = 1\ncolour = 1\n[data]\npath = \"x\"\n").is_err());
        assert!(RunConfig::from_toml("version = 1\n[data]\npath = \"x\"\n[trmf]\nrnak = 2\n").is_err());
    }

    #[test]
    fn small_rank_two_panel_beats_direct_naive() {
        let panel = latent_panel(&PanelConfig {
            n_series: 10,
            n_latent: 2,
            noise: 0.02,
            seed: 11,
            ..Default::default()
        });
        let mut config = RunConfig::for_data("unused.csv");
        config.trmf.rank = 2;
        let prepared = prepare_matrix(&panel.data, &config.split, Some(panel.categories.clone())).unwrap();
        let outcome = run_prepared(&config, prepared, Stopwatch::start(), false).unwrap();
        let naive = outcome
            .benchmark
            .rows
            .iter()
            .find(|r| r.approach == "direct" && r.method == "naive")
            .unwrap();
        let pipeline = outcome.benchmark.pipeline_owa.unwrap();
        assert!(pipeline < naive.owa.unwrap(), "{}", outcome.benchmark.table());
        assert!(outcome.violations.is_empty());
        assert!(outcome.access_reads > 0);
        assert_eq!(outcome.latent.provenance.len(), 2);
    }
}
