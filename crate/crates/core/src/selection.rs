//! Forward-chaining cross-validation of the method menu on each latent
//! series, median-of-top-3 ensembling, and reconstruction of the panel
//! forecast `FᵀX̂`.

use std::io::{Read, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::audit::{AccessLog, Guarded};
use crate::forecasters::{fit_predict, ForecastError, MethodMenu};
use crate::linalg::Matrix;
use crate::metrics;
use crate::parallel;
use crate::series::reconstruct;
use crate::trmf::TrmfModel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error("series of length {n} is too short for cross-validation with min_train = {min_train}")]
    TooShort { n: usize, min_train: usize },
    #[error("fold_length, min_train and the ensemble size must be positive")]
    InvalidSettings,
    #[error("latent series {0}: no method is applicable")]
    NoApplicableMethod(String),
    #[error("latent series {id}: {source}")]
    Forecast { id: String, source: ForecastError },
    #[error("report covers {report} latent series but {latent} were given")]
    ReportMismatch { report: usize, latent: usize },
    #[error("report names method {0:?} which is not on the menu")]
    UnknownMethod(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("malformed CV table: {0}")]
    Parse(String),
}

/// One expanding-window fold: fit on `[0, train_end)`, score on `validate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train_end: usize,
    pub validate: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub fold_length: usize,
    pub min_train: usize,
    pub folds: Vec<Fold>,
    /// Set when the series was too short for a full fold and a single
    /// shorter validation block is used instead.
    pub warning: Option<String>,
}

/// Folds at `train_end = min_train, min_train + fold_length, ...` while a
/// full validation block fits. A series with room for fewer than
/// `fold_length` validation points gets one shorter fold and a warning.
pub fn plan_folds(n: usize, fold_length: usize, min_train: usize) -> Result<FoldPlan, SelectionError> {
    if fold_length == 0 || min_train == 0 {
        return Err(SelectionError::InvalidSettings);
    }
    let mut folds = Vec::new();
    let mut train_end = min_train;
    while train_end + fold_length <= n {
        folds.push(Fold {
            train_end,
            validate: train_end..train_end + fold_length,
        });
        train_end += fold_length;
    }
    let mut warning = None;
    if folds.is_empty() {
        if n < min_train + 1 {
            return Err(SelectionError::TooShort { n, min_train });
        }
        warning = Some(format!(
            "series length {n} leaves {} validation points (< fold length {fold_length}); using a single short fold",
            n - min_train
        ));
        folds.push(Fold {
            train_end: min_train,
            validate: min_train..n,
        });
    }
    Ok(FoldPlan {
        fold_length,
        min_train,
        folds,
        warning,
    })
}

/// Error measure used to rank methods on validation blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RankMetric {
    /// sMAPE with the `|Y + F|` denominator.
    Smape,
    /// sMAPE with the `|Y| + |F|` denominator, bounded for signed data.
    SmapeAbs,
    /// Mean absolute error. The default: latent series are signed and
    /// centred near zero, where percentage errors are ill-conditioned.
    #[default]
    Mae,
}

impl RankMetric {
    pub fn score(self, actual: &[f64], forecast: &[f64]) -> f64 {
        let r = match self {
            Self::Smape => metrics::smape(actual, forecast),
            Self::SmapeAbs => metrics::smape_abs(actual, forecast),
            Self::Mae => metrics::mae(actual, forecast),
        };
        r.unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSettings {
    pub fold_length: usize,
    pub min_train: usize,
    pub metric: RankMetric,
    /// Ensemble size; the median of this many top-ranked methods is used.
    pub top: usize,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self {
            fold_length: 6,
            min_train: 24,
            metric: RankMetric::default(),
            top: 3,
        }
    }
}

impl CvSettings {
    pub fn validate(&self) -> Result<(), SelectionError> {
        if self.fold_length == 0 || self.min_train == 0 || self.top == 0 {
            return Err(SelectionError::InvalidSettings);
        }
        Ok(())
    }
}

/// Cross-validation outcome of one method on one latent series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: String,
    /// Score per fold; `None` where the method was inapplicable or its
    /// score was not finite.
    pub fold_scores: Vec<Option<f64>>,
    /// Mean over the scored folds; `None` if no fold was scored.
    pub mean_score: Option<f64>,
    /// 1-based rank among eligible methods; `None` if inapplicable on
    /// every fold.
    pub rank: Option<usize>,
}

impl MethodScore {
    fn scored_folds(&self) -> usize {
        self.fold_scores.iter().filter(|s| s.is_some()).count()
    }
}

/// Ranking of the whole menu on one latent series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentRanking {
    pub latent_id: String,
    /// Scores in menu order.
    pub methods: Vec<MethodScore>,
    /// Eligible method names from best to worst.
    pub order: Vec<String>,
    /// The ensemble members selected by cross-validation.
    pub top: Vec<String>,
}

/// Fits every menu method on every fold of `series` and ranks them.
///
/// Methods scored on all folds rank first by mean score, then methods
/// scored on only some folds, by mean over those folds. Ties keep menu
/// order. Methods never scored are ineligible.
pub fn rank_methods(
    series: Guarded<'_>,
    period: usize,
    menu: &MethodMenu,
    plan: &FoldPlan,
    metric: RankMetric,
    top: usize,
) -> LatentRanking {
    let methods: Vec<MethodScore> = (0..menu.len())
        .map(|i| score_method(series, period, menu, i, plan, metric))
        .collect();
    finish_ranking(series.label().to_string(), methods, plan.folds.len(), top)
}

fn score_method(
    series: Guarded<'_>,
    period: usize,
    menu: &MethodMenu,
    index: usize,
    plan: &FoldPlan,
    metric: RankMetric,
) -> MethodScore {
    let method = menu.get(index);
    let fold_scores: Vec<Option<f64>> = plan
        .folds
        .iter()
        .map(|fold| {
            let history = series.window(fold.train_end, fold.validate.start);
            let forecast = fit_predict(method, history, period, fold.validate.len()).ok()?;
            let score = metric.score(series.score_slice(fold.validate.clone()), &forecast);
            score.is_finite().then_some(score)
        })
        .collect();
    let scored: Vec<f64> = fold_scores.iter().flatten().copied().collect();
    let mean_score = (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
    MethodScore {
        method: method.name().to_string(),
        fold_scores,
        mean_score,
        rank: None,
    }
}

fn finish_ranking(latent_id: String, mut methods: Vec<MethodScore>, n_folds: usize, top: usize) -> LatentRanking {
    let mut eligible: Vec<usize> = (0..methods.len()).filter(|&i| methods[i].mean_score.is_some()).collect();
    // Stable sort keeps menu order among ties.
    eligible.sort_by(|&a, &b| {
        let tier = |i: usize| usize::from(methods[i].scored_folds() < n_folds);
        tier(a)
            .cmp(&tier(b))
            .then(methods[a].mean_score.unwrap().total_cmp(&methods[b].mean_score.unwrap()))
    });
    for (r, &i) in eligible.iter().enumerate() {
        methods[i].rank = Some(r + 1);
    }
    let order: Vec<String> = eligible.iter().map(|&i| methods[i].method.clone()).collect();
    LatentRanking {
        latent_id,
        top: order.iter().take(top).cloned().collect(),
        order,
        methods,
    }
}

/// Elementwise median of equally long forecasts. An even count takes the
/// mean of the middle pair.
pub fn elementwise_median(forecasts: &[Vec<f64>]) -> Vec<f64> {
    let h = forecasts.first().map_or(0, Vec::len);
    (0..h)
        .map(|j| {
            let mut col: Vec<f64> = forecasts.iter().map(|f| f[j]).collect();
            col.sort_by(f64::total_cmp);
            let n = col.len();
            if n % 2 == 1 {
                col[n / 2]
            } else {
                0.5 * (col[n / 2 - 1] + col[n / 2])
            }
        })
        .collect()
}

/// Ensemble forecast of one latent series with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentForecast {
    pub latent_id: String,
    pub forecast: Vec<f64>,
    /// Methods whose forecasts entered the median.
    pub members: Vec<String>,
}

/// Refits the best-ranked methods on the full `history` and returns the
/// elementwise median of their forecasts. A member that fails on the full
/// history is replaced by the next method in the ranking.
pub fn ensemble_forecast(
    history: &[f64],
    period: usize,
    ranking: &LatentRanking,
    menu: &MethodMenu,
    horizon: usize,
    top: usize,
) -> Result<LatentForecast, SelectionError> {
    let mut forecasts = Vec::new();
    let mut members = Vec::new();
    let mut last_err = None;
    for name in &ranking.order {
        if members.len() == top {
            break;
        }
        let index = menu
            .position(name)
            .ok_or_else(|| SelectionError::UnknownMethod(name.clone()))?;
        match fit_predict(menu.get(index), history, period, horizon) {
            Ok(f) => {
                forecasts.push(f);
                members.push(name.clone());
            }
            Err(e) => last_err = Some(e),
        }
    }
    if members.is_empty() {
        return Err(match last_err {
            Some(source) => SelectionError::Forecast {
                id: ranking.latent_id.clone(),
                source,
            },
            None => SelectionError::NoApplicableMethod(ranking.latent_id.clone()),
        });
    }
    Ok(LatentForecast {
        latent_id: ranking.latent_id.clone(),
        forecast: elementwise_median(&forecasts),
        members,
    })
}

/// Per-fold score table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub latent_id: String,
    pub method: String,
    pub fold: usize,
    pub score: Option<f64>,
}

/// Cross-validation results for every latent series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub metric: RankMetric,
    pub plan: FoldPlan,
    pub latents: Vec<LatentRanking>,
}

impl CvReport {
    /// Long-format table, one row per (latent series, method, fold).
    pub fn fold_table(&self) -> Vec<FoldScore> {
        let mut rows = Vec::new();
        for l in &self.latents {
            for m in &l.methods {
                for (f, s) in m.fold_scores.iter().enumerate() {
                    rows.push(FoldScore {
                        latent_id: l.latent_id.clone(),
                        method: m.method.clone(),
                        fold: f + 1,
                        score: *s,
                    });
                }
            }
        }
        rows
    }

    /// Writes the fold table with header `latent_id,method,fold,smape`.
    /// Unscored folds have an empty score cell.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["latent_id", "method", "fold", "smape"])?;
        for row in self.fold_table() {
            w.write_record([
                row.latent_id,
                row.method,
                row.fold.to_string(),
                row.score.map(|s| s.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Vec<FoldScore>, SelectionError> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for (i, record) in r.records().enumerate() {
            let record = record.map_err(|e| SelectionError::Parse(e.to_string()))?;
            let line = i + 2;
            let bad = |what: &str| SelectionError::Parse(format!("line {line}: bad {what}"));
            if record.len() != 4 {
                return Err(bad("column count"));
            }
            let score = match &record[3] {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("smape"))?),
            };
            rows.push(FoldScore {
                latent_id: record[0].to_string(),
                method: record[1].to_string(),
                fold: record[2].parse().map_err(|_| bad("fold"))?,
                score,
            });
        }
        Ok(rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Identifier of latent dimension `k` (0-based) in reports: `L1`, `L2`, ...
pub fn latent_id(k: usize) -> String {
    format!("L{}", k + 1)
}

/// Cross-validates the menu on every row of `latent` (K×T). When `log` is
/// given, every training-window read is audited.
pub fn cross_validate(
    latent: &Matrix,
    period: usize,
    menu: &MethodMenu,
    settings: &CvSettings,
    log: Option<&AccessLog>,
) -> Result<CvReport, SelectionError> {
    settings.validate()?;
    let plan = plan_folds(latent.cols(), settings.fold_length, settings.min_train)?;
    let ids: Vec<String> = (0..latent.rows()).map(latent_id).collect();
    // One task per (latent series, method); folds run inside the task.
    let tasks: Vec<(usize, usize)> = (0..latent.rows())
        .flat_map(|k| (0..menu.len()).map(move |m| (k, m)))
        .collect();
    let scores = parallel::map(&tasks, |&(k, m)| {
        let series = Guarded::new(latent.row(k), &ids[k], log);
        score_method(series, period, menu, m, &plan, settings.metric)
    });
    let mut scores = scores.into_iter();
    let latents = ids
        .iter()
        .map(|id| {
            let methods: Vec<MethodScore> = scores.by_ref().take(menu.len()).collect();
            finish_ranking(id.clone(), methods, plan.folds.len(), settings.top)
        })
        .collect();
    Ok(CvReport {
        metric: settings.metric,
        plan,
        latents,
    })
}

/// Ensemble forecasts for every latent row, as a K×h matrix plus
/// provenance.
pub fn forecast_latents(
    latent: &Matrix,
    period: usize,
    report: &CvReport,
    menu: &MethodMenu,
    horizon: usize,
    top: usize,
) -> Result<(Matrix, Vec<LatentForecast>), SelectionError> {
    if report.latents.len() != latent.rows() {
        return Err(SelectionError::ReportMismatch {
            report: report.latents.len(),
            latent: latent.rows(),
        });
    }
    let rows: Vec<usize> = (0..latent.rows()).collect();
    let results = parallel::map(&rows, |&k| {
        ensemble_forecast(latent.row(k), period, &report.latents[k], menu, horizon, top)
    });
    let forecasts = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut x_hat = Matrix::zeros(latent.rows(), horizon);
    for (k, f) in forecasts.iter().enumerate() {
        x_hat.row_mut(k).copy_from_slice(&f.forecast);
    }
    Ok((x_hat, forecasts))
}

/// Panel forecast through the factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelForecast {
    /// N×h forecasts `FᵀX̂` in the model's (possibly standardized) units.
    pub forecasts: Matrix,
    /// K×h latent forecasts `X̂`.
    pub latent: Matrix,
    pub report: CvReport,
    pub provenance: Vec<LatentForecast>,
}

/// Cross-validates and ensembles each latent series of `model`, holding the
/// loadings fixed, and maps the latent forecasts back to the panel.
pub fn forecast_panel(
    model: &TrmfModel,
    period: usize,
    menu: &MethodMenu,
    settings: &CvSettings,
    horizon: usize,
    log: Option<&AccessLog>,
) -> Result<PanelForecast, SelectionError> {
    let report = cross_validate(&model.temporal, period, menu, settings, log)?;
    let (latent, provenance) = forecast_latents(&model.temporal, period, &report, menu, horizon, settings.top)?;
    let forecasts = reconstruct(&model.factors, &latent).map_err(|e| SelectionError::Shape(e.to_string()))?;
    Ok(PanelForecast {
        forecasts,
        latent,
        report,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecasters::{Forecaster, MethodSpec};

    #[test]
    fn fold_plans() {
        let p = plan_folds(60, 6, 24).unwrap();
        assert_eq!(p.folds.len(), 6);
        assert_eq!(p.folds[0].validate, 24..30);
        assert_eq!(p.folds[5].validate, 54..60);
        assert!(p.warning.is_none());
        for w in p.folds.windows(2) {
            assert_eq!(w[0].validate.end, w[1].validate.start);
        }
        for f in &p.folds {
            assert_eq!(f.train_end, f.validate.start);
        }
        assert_eq!(plan_folds(30, 6, 24).unwrap().folds.len(), 1);
        assert!(matches!(plan_folds(24, 6, 24), Err(SelectionError::TooShort { .. })));
        let short = plan_folds(27, 6, 24).unwrap();
        assert_eq!(short.folds, vec![Fold { train_end: 24, validate: 24..27 }]);
        assert!(short.warning.is_some());
    }

    #[test]
    fn median_conventions() {
        assert_eq!(
            elementwise_median(&[vec![1.0; 3], vec![2.0; 3], vec![9.0; 3]]),
            vec![2.0; 3]
        );
        assert_eq!(elementwise_median(&[vec![1.0, 4.0], vec![3.0, 0.0]]), vec![2.0, 2.0]);
    }

    fn menu() -> MethodMenu {
        MethodMenu::standard()
    }

    #[test]
    fn periodic_series_ranks_seasonal_naive_first() {
        let pattern = [1.0, 4.0, -2.0, 3.0, 0.5, -1.0, 2.0, 5.0, -3.0, 0.0, 1.5, -0.5];
        let y: Vec<f64> = (0..60).map(|t| pattern[t % 12]).collect();
        let plan = plan_folds(60, 6, 24).unwrap();
        for metric in [RankMetric::Smape, RankMetric::SmapeAbs, RankMetric::Mae] {
            let r = rank_methods(Guarded::unaudited(&y), 12, &menu(), &plan, metric, 3);
            let sn = r.methods.iter().find(|m| m.method == "snaive").unwrap();
            assert_eq!(sn.mean_score, Some(0.0));
            assert_eq!(r.order[0], "snaive", "{metric:?}");
        }
    }

    #[test]
    fn ranks_are_a_permutation_and_ineligible_methods_are_unranked() {
        // Signed data: multiplicative and Box-Cox methods are inapplicable.
        let y: Vec<f64> = (0..60).map(|t| (t as f64 * 0.7).sin() * 3.0).collect();
        let plan = plan_folds(60, 6, 24).unwrap();
        let r = rank_methods(Guarded::unaudited(&y), 12, &menu(), &plan, RankMetric::SmapeAbs, 3);
        let mut ranks: Vec<usize> = r.methods.iter().filter_map(|m| m.rank).collect();
        ranks.sort();
        assert_eq!(ranks, (1..=r.order.len()).collect::<Vec<_>>());
        let hw = r.methods.iter().find(|m| m.method == "hw_multiplicative").unwrap();
        assert_eq!(hw.rank, None);
        assert!(!r.order.contains(&"theta_boxcox".to_string()));
        assert_eq!(r.top.len(), 3);
    }

    struct Oracle;
    impl Forecaster for Oracle {
        fn name(&self) -> &str {
            "huge"
        }
        fn min_history(&self, _: usize) -> usize {
            1
        }
        fn forecast(&self, _: &[f64], _: usize, h: usize) -> Result<Vec<f64>, ForecastError> {
            Ok(vec![1e12; h])
        }
    }

    #[test]
    fn strictly_worse_method_changes_nothing() {
        let y: Vec<f64> = (0..60).map(|t| 10.0 + 0.3 * t as f64 + (t as f64).cos()).collect();
        let plan = plan_folds(60, 6, 24).unwrap();
        let base = rank_methods(Guarded::unaudited(&y), 12, &menu(), &plan, RankMetric::SmapeAbs, 3);
        let mut bigger = menu();
        bigger.register(Box::new(Oracle)).unwrap();
        let more = rank_methods(Guarded::unaudited(&y), 12, &bigger, &plan, RankMetric::SmapeAbs, 3);
        assert_eq!(base.top, more.top);
        let a = ensemble_forecast(&y, 12, &base, &menu(), 12, 3).unwrap();
        let b = ensemble_forecast(&y, 12, &more, &bigger, 12, 3).unwrap();
        assert_eq!(a, b);
        // The ensemble stays inside its members' envelope.
        for (j, v) in a.forecast.iter().enumerate() {
            let member: Vec<f64> = a
                .members
                .iter()
                .map(|m| fit_predict(menu().get(menu().position(m).unwrap()), &y, 12, 12).unwrap()[j])
                .collect();
            let lo = member.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = member.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(*v >= lo && *v <= hi);
        }
    }

    #[test]
    fn cv_reads_stay_before_validation() {
        let log = AccessLog::new();
        let latent = Matrix::from_rows(&[
            (0..60).map(|t| (t as f64).sin()).collect(),
            (0..60).map(|t| t as f64).collect(),
        ])
        .unwrap();
        let report = cross_validate(&latent, 12, &menu(), &CvSettings::default(), Some(&log)).unwrap();
        assert_eq!(report.latents.len(), 2);
        assert_eq!(log.reads(), 2 * 15 * 6);
        assert!(log.violations().is_empty());
    }

    #[test]
    fn single_applicable_method_is_a_singleton_ensemble() {
        let specs: Vec<MethodSpec> = ["hw_multiplicative", "ses_boxcox", "theta_boxcox", "mean"]
            .iter()
            .map(|s| MethodSpec::parse(s))
            .collect();
        let menu = MethodMenu::from_specs(&specs).unwrap();
        let y: Vec<f64> = (0..40).map(|t| (t as f64).sin()).collect();
        let plan = plan_folds(40, 6, 24).unwrap();
        let r = rank_methods(Guarded::unaudited(&y), 12, &menu, &plan, RankMetric::SmapeAbs, 3);
        assert_eq!(r.top, vec!["mean"]);
        assert_eq!(r.methods[3].rank, Some(1));
        let f = ensemble_forecast(&y, 12, &r, &menu, 4, 3).unwrap();
        assert_eq!(f.members, vec!["mean"]);
    }

    #[test]
    fn panel_forecast_is_linear_in_loadings() {
        let mut model = crate::trmf::fit(
            &crate::series::SeriesMatrix::from_rows(
                vec!["a".into(), "b".into()],
                &[
                    (0..48).map(|t| 5.0 + (t % 12) as f64).collect(),
                    (0..48).map(|t| 2.0 * (5.0 + (t % 12) as f64)).collect(),
                ],
                12,
            )
            .unwrap(),
            &crate::trmf::TrmfConfig {
                rank: 1,
                max_iterations: 50,
                ..Default::default()
            },
        )
        .unwrap();
        let settings = CvSettings::default();
        let base = forecast_panel(&model, 12, &menu(), &settings, 12, None).unwrap();
        model.factors.row_mut(0)[1] *= 3.0;
        let scaled = forecast_panel(&model, 12, &menu(), &settings, 12, None).unwrap();
        for j in 0..12 {
            assert_eq!(base.forecasts[(0, j)], scaled.forecasts[(0, j)]);
            assert!((3.0 * base.forecasts[(1, j)] - scaled.forecasts[(1, j)]).abs() < 1e-12 * scaled.forecasts[(1, j)].abs().max(1.0));
        }
    }

    #[test]
    fn report_round_trips() {
        let latent = Matrix::from_rows(&[(0..40).map(|t| (t as f64 * 0.3).sin() + 2.0).collect()]).unwrap();
        let report = cross_validate(&latent, 12, &menu(), &CvSettings::default(), None).unwrap();
        assert_eq!(CvReport::from_json(&report.to_json()).unwrap(), report);
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(CvReport::read_csv(buf.as_slice()).unwrap(), report.fold_table());
    }
}
