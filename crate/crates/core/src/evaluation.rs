//! Scoring panel forecasts against the held-out window: per-series sMAPE
//! and MASE, aggregates, OWA against Naive2, and category breakdowns.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::metrics::{self, MetricError};
use crate::series::SeriesMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("forecasts are {rows}x{cols} but the test panel is {n}x{h}")]
    Shape { rows: usize, cols: usize, n: usize, h: usize },
    #[error("training and test panels list different series")]
    IdMismatch,
    #[error("series {id}: {source}")]
    Metric { id: String, source: MetricError },
    #[error("series {id}: test window is incomplete")]
    IncompleteTest { id: String },
}

#[derive(Debug, Clone, PartialEq)]
struct SeriesReference {
    /// In-sample seasonal-naive scale, `None` when degenerate or too short.
    scale: Option<f64>,
    actual: Vec<f64>,
    naive2: Vec<f64>,
    smape_naive2: f64,
    mase_naive2: Option<f64>,
}

/// Naive2 forecasts and MASE scales for a dataset, computed once and shared
/// by every evaluated method so that all OWAs use the same reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    ids: Vec<String>,
    period: usize,
    horizon: usize,
    series: Vec<SeriesReference>,
    categories: Vec<Option<String>>,
}

impl Reference {
    /// `train` holds the in-sample windows and `test` the held-out windows
    /// of the same series in the same order.
    pub fn new(
        train: &SeriesMatrix,
        test: &SeriesMatrix,
        categories: Option<&HashMap<String, String>>,
    ) -> Result<Self, EvalError> {
        if train.ids() != test.ids() {
            return Err(EvalError::IdMismatch);
        }
        let period = train.period();
        let horizon = test.n_cols();
        let mut series = Vec::with_capacity(train.n_series());
        for (row, test_row) in train.rows().zip(test.rows()) {
            let id = row.id().to_string();
            let actual: Vec<f64> = (0..horizon)
                .map(|t| test_row.get(t))
                .collect::<Option<_>>()
                .ok_or_else(|| EvalError::IncompleteTest { id: id.clone() })?;
            let history = row.history();
            let metric_err = |source| EvalError::Metric { id: id.clone(), source };
            let scale = match metrics::masked_seasonal_scale(row.raw(), row.mask(), period) {
                Ok(s) => Some(s),
                Err(MetricError::DegenerateScale | MetricError::InsufficientHistory { .. }) => None,
                Err(e) => return Err(metric_err(e)),
            };
            let naive2 = metrics::naive2(&history, period, horizon).map_err(metric_err)?;
            let smape_naive2 = metrics::smape(&actual, &naive2).map_err(metric_err)?;
            let mase_naive2 = scale.map(|s| metrics::mae(&actual, &naive2).map(|e| e / s)).transpose().map_err(metric_err)?;
            series.push(SeriesReference {
                scale,
                actual,
                naive2,
                smape_naive2,
                mase_naive2,
            });
        }
        let categories = train
            .ids()
            .iter()
            .map(|id| categories.and_then(|c| c.get(id).cloned()))
            .collect();
        Ok(Self {
            ids: train.ids().to_vec(),
            period,
            horizon,
            series,
            categories,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// The Naive2 forecasts as an N×h matrix.
    pub fn naive2_forecasts(&self) -> Matrix {
        let rows: Vec<Vec<f64>> = self.series.iter().map(|s| s.naive2.clone()).collect();
        Matrix::from_rows(&rows).expect("equal horizons")
    }

    /// Scores `forecasts` (N×h, same series order). `fallback[i]` marks
    /// series whose forecast was replaced by Naive2.
    pub fn evaluate(&self, method: &str, forecasts: &Matrix, fallback: &[bool]) -> Result<EvalReport, EvalError> {
        let n = self.series.len();
        if forecasts.rows() != n || forecasts.cols() != self.horizon {
            return Err(EvalError::Shape {
                rows: forecasts.rows(),
                cols: forecasts.cols(),
                n,
                h: self.horizon,
            });
        }
        let mut rows = Vec::with_capacity(n);
        for (i, s) in self.series.iter().enumerate() {
            let id = &self.ids[i];
            let metric_err = |source| EvalError::Metric { id: id.clone(), source };
            let f = forecasts.row(i);
            let smape = metrics::smape(&s.actual, f).map_err(metric_err)?;
            let mase = s
                .scale
                .map(|scale| metrics::mae(&s.actual, f).map(|e| e / scale))
                .transpose()
                .map_err(metric_err)?;
            rows.push(SeriesEval {
                id: id.clone(),
                smape,
                mase,
                degenerate: s.scale.is_none(),
                category: self.categories[i].clone(),
                fallback: fallback.get(i).copied().unwrap_or(false),
            });
        }
        let all: Vec<usize> = (0..n).collect();
        let aggregate = self.aggregate(&rows, &all);
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, c) in self.categories.iter().enumerate() {
            if let Some(c) = c {
                groups.entry(c.as_str()).or_default().push(i);
            }
        }
        let categories = groups
            .into_iter()
            .map(|(name, members)| CategoryEval {
                category: name.to_string(),
                aggregate: self.aggregate(&rows, &members),
            })
            .collect();
        Ok(EvalReport {
            method: method.to_string(),
            horizon: self.horizon,
            period: self.period,
            aggregate,
            categories,
            series: rows,
        })
    }

    fn aggregate(&self, rows: &[SeriesEval], members: &[usize]) -> Aggregate {
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let smapes: Vec<f64> = members.iter().map(|&i| rows[i].smape).collect();
        let scored: Vec<usize> = members.iter().copied().filter(|&i| rows[i].mase.is_some()).collect();
        let mases: Vec<f64> = scored.iter().map(|&i| rows[i].mase.unwrap()).collect();
        let owa_smape: Vec<f64> = scored.iter().map(|&i| rows[i].smape).collect();
        let ref_smape: Vec<f64> = scored.iter().map(|&i| self.series[i].smape_naive2).collect();
        let ref_mase: Vec<f64> = scored.iter().map(|&i| self.series[i].mase_naive2.unwrap()).collect();
        let owa = match (mean(&owa_smape), mean(&mases), mean(&ref_smape), mean(&ref_mase)) {
            (Some(s), Some(m), Some(rs), Some(rm)) => metrics::owa(s, m, rs, rm).ok(),
            _ => None,
        };
        Aggregate {
            smape: mean(&smapes).unwrap_or(f64::NAN),
            mase: mean(&mases),
            owa,
            n_series: members.len(),
            n_degenerate: members.len() - scored.len(),
            n_fallback: members.iter().filter(|&&i| rows[i].fallback).count(),
        }
    }
}

/// Scores of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEval {
    pub id: String,
    pub smape: f64,
    /// `None` when the in-sample seasonal-naive scale is zero or undefined.
    pub mase: Option<f64>,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub category: Option<String>,
    /// The method failed on this series and Naive2 was substituted.
    pub fallback: bool,
}

/// Aggregates over a set of series. `smape` averages every series; `mase`
/// and the OWA inputs average only series with a usable MASE scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub smape: f64,
    pub mase: Option<f64>,
    pub owa: Option<metrics::OwaReport>,
    pub n_series: usize,
    pub n_degenerate: usize,
    pub n_fallback: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryEval {
    pub category: String,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub horizon: usize,
    pub period: usize,
    pub aggregate: Aggregate,
    pub categories: Vec<CategoryEval>,
    pub series: Vec<SeriesEval>,
}

impl EvalReport {
    pub fn owa(&self) -> Option<f64> {
        self.aggregate.owa.as_ref().map(|o| o.owa)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
