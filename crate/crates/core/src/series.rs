//! Panels of time series with an observation mask, the train/test split, and
//! reconstruction of a panel from its factors.
//!
//! Time is positional: column `t` of every row is the `t`-th slot of the
//! panel. Ragged inputs are stored left-aligned with a masked-out tail; the
//! split aligns every series on its own last observation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("a panel needs at least one series and one time step")]
    Empty,
    #[error("expected {expected} cells, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("series {id}: observed value at position {t} is not finite")]
    NonFinite { id: String, t: usize },
    #[error("duplicate series id {0:?}")]
    DuplicateId(String),
    #[error("seasonal period must be positive")]
    ZeroPeriod,
    #[error("series {id}: {observed} observed points, need more than the horizon {horizon}")]
    TooShort {
        id: String,
        observed: usize,
        horizon: usize,
    },
    #[error("series {id}: test window contains unobserved points")]
    IncompleteTestWindow { id: String },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("factor shapes do not agree: F is {f_rows}x{f_cols}, X is {x_rows}x{x_cols}")]
    ShapeMismatch {
        f_rows: usize,
        f_cols: usize,
        x_rows: usize,
        x_cols: usize,
    },
}

/// N x T panel of observations with mask and seasonal period.
///
/// Unobserved cells hold `NaN`; observed cells are always finite.
/// Equality compares ids, shape, period, mask and observed values.
#[derive(Debug, Clone)]
pub struct SeriesMatrix {
    ids: Vec<String>,
    n_cols: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
    period: usize,
}

impl PartialEq for SeriesMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
            && self.n_cols == other.n_cols
            && self.period == other.period
            && self.mask == other.mask
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.mask)
                .all(|((a, b), &m)| !m || a.to_bits() == b.to_bits())
    }
}

impl SeriesMatrix {
    /// Builds a panel from rows of optional values. Rows shorter than the
    /// longest row are padded with unobserved cells.
    pub fn from_optional_rows(
        ids: Vec<String>,
        rows: Vec<Vec<Option<f64>>>,
        period: usize,
    ) -> Result<Self, SeriesError> {
        if ids.len() != rows.len() {
            return Err(SeriesError::DimensionMismatch {
                expected: ids.len(),
                found: rows.len(),
            });
        }
        let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        let mut mask = Vec::with_capacity(rows.len() * n_cols);
        for row in &rows {
            for t in 0..n_cols {
                match row.get(t).copied().flatten() {
                    Some(v) => {
                        values.push(v);
                        mask.push(true);
                    }
                    None => {
                        values.push(f64::NAN);
                        mask.push(false);
                    }
                }
            }
        }
        Self::from_parts(ids, n_cols, values, mask, period)
    }

    /// Builds a fully observed panel from equally long rows.
    pub fn from_rows(ids: Vec<String>, rows: &[Vec<f64>], period: usize) -> Result<Self, SeriesError> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(SeriesError::DimensionMismatch {
                expected: n_cols,
                found: bad.len(),
            });
        }
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        let mask = vec![true; values.len()];
        Self::from_parts(ids, n_cols, values, mask, period)
    }

    /// Builds a fully observed panel from a dense matrix.
    pub fn from_dense(ids: Vec<String>, matrix: &Matrix, period: usize) -> Result<Self, SeriesError> {
        Self::from_parts(
            ids,
            matrix.cols(),
            matrix.as_slice().to_vec(),
            vec![true; matrix.rows() * matrix.cols()],
            period,
        )
    }

    pub fn from_parts(
        ids: Vec<String>,
        n_cols: usize,
        mut values: Vec<f64>,
        mask: Vec<bool>,
        period: usize,
    ) -> Result<Self, SeriesError> {
        if ids.is_empty() || n_cols == 0 {
            return Err(SeriesError::Empty);
        }
        if period == 0 {
            return Err(SeriesError::ZeroPeriod);
        }
        let expected = ids.len() * n_cols;
        for len in [values.len(), mask.len()] {
            if len != expected {
                return Err(SeriesError::DimensionMismatch { expected, found: len });
            }
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(SeriesError::DuplicateId(id.clone()));
            }
        }
        for (idx, (v, &m)) in values.iter_mut().zip(&mask).enumerate() {
            if m {
                if !v.is_finite() {
                    return Err(SeriesError::NonFinite {
                        id: ids[idx / n_cols].clone(),
                        t: idx % n_cols,
                    });
                }
            } else {
                *v = f64::NAN;
            }
        }
        Ok(Self {
            ids,
            n_cols,
            values,
            mask,
            period,
        })
    }

    pub fn n_series(&self) -> usize {
        self.ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn value(&self, i: usize, t: usize) -> Option<f64> {
        let idx = i * self.n_cols + t;
        self.mask[idx].then(|| self.values[idx])
    }

    pub fn is_observed(&self, i: usize, t: usize) -> bool {
        self.mask[i * self.n_cols + t]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Raw row-major values; unobserved cells are `NaN`.
    pub fn raw_values(&self) -> &[f64] {
        &self.values
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_fully_observed(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    pub fn row(&self, i: usize) -> SeriesView<'_> {
        let range = i * self.n_cols..(i + 1) * self.n_cols;
        SeriesView {
            id: &self.ids[i],
            values: &self.values[range.clone()],
            mask: &self.mask[range],
            period: self.period,
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = SeriesView<'_>> {
        (0..self.n_series()).map(|i| self.row(i))
    }

    /// Dense copy with unobserved cells set to zero.
    pub fn to_dense_zero_filled(&self) -> Matrix {
        let data = self
            .values
            .iter()
            .zip(&self.mask)
            .map(|(&v, &m)| if m { v } else { 0.0 })
            .collect();
        Matrix::from_vec(self.n_series(), self.n_cols, data).expect("shape is consistent")
    }

    /// Same panel, relabelled with a different seasonal period.
    pub fn with_period(mut self, period: usize) -> Result<Self, SeriesError> {
        if period == 0 {
            return Err(SeriesError::ZeroPeriod);
        }
        self.period = period;
        Ok(self)
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self, SeriesError> {
        let ids = rows.iter().map(|&i| self.ids[i].clone()).collect();
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        let mut mask = Vec::with_capacity(rows.len() * self.n_cols);
        for &i in rows {
            let range = i * self.n_cols..(i + 1) * self.n_cols;
            values.extend_from_slice(&self.values[range.clone()]);
            mask.extend_from_slice(&self.mask[range]);
        }
        Self::from_parts(ids, self.n_cols, values, mask, self.period)
    }

    /// Concatenates `other` after `self` along time. Both panels must list
    /// the same series in the same order.
    pub fn concat_time(&self, other: &SeriesMatrix) -> Result<Self, SeriesError> {
        if self.ids != other.ids {
            return Err(SeriesError::InvalidSplit("panels list different series".into()));
        }
        let n_cols = self.n_cols + other.n_cols;
        let mut values = Vec::with_capacity(self.n_series() * n_cols);
        let mut mask = Vec::with_capacity(self.n_series() * n_cols);
        for i in 0..self.n_series() {
            let a = i * self.n_cols..(i + 1) * self.n_cols;
            let b = i * other.n_cols..(i + 1) * other.n_cols;
            values.extend_from_slice(&self.values[a.clone()]);
            values.extend_from_slice(&other.values[b.clone()]);
            mask.extend_from_slice(&self.mask[a]);
            mask.extend_from_slice(&other.mask[b]);
        }
        Self::from_parts(self.ids.clone(), n_cols, values, mask, self.period)
    }
}

/// Serialized form: one array per series with `null` for unobserved cells.
#[derive(Serialize, Deserialize)]
struct SeriesMatrixRepr {
    period: usize,
    ids: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl Serialize for SeriesMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SeriesMatrixRepr {
            period: self.period,
            ids: self.ids.clone(),
            rows: self
                .rows()
                .map(|r| (0..r.len()).map(|t| r.get(t)).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SeriesMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SeriesMatrixRepr::deserialize(deserializer)?;
        let n_cols = repr.rows.iter().map(Vec::len).max().unwrap_or(0);
        if repr.rows.iter().any(|r| r.len() != n_cols) {
            return Err(serde::de::Error::custom("rows must have equal length"));
        }
        SeriesMatrix::from_optional_rows(repr.ids, repr.rows, repr.period).map_err(serde::de::Error::custom)
    }
}

/// One row of a [`SeriesMatrix`].
#[derive(Debug, Clone, Copy)]
pub struct SeriesView<'a> {
    id: &'a str,
    values: &'a [f64],
    mask: &'a [bool],
    period: usize,
}

impl<'a> SeriesView<'a> {
    pub fn id(&self) -> &'a str {
        self.id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        self.mask[t].then(|| self.values[t])
    }

    pub fn mask(&self) -> &'a [bool] {
        self.mask
    }

    /// Raw values; unobserved cells are `NaN`.
    pub fn raw(&self) -> &'a [f64] {
        self.values
    }

    pub fn observed(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Half-open range from the first to one past the last observed point.
    pub fn observed_span(&self) -> Option<std::ops::Range<usize>> {
        let first = self.mask.iter().position(|&m| m)?;
        let last = self.mask.iter().rposition(|&m| m)?;
        Some(first..last + 1)
    }

    /// Contiguous history from the first to the last observed point, with
    /// interior gaps filled by linear interpolation.
    pub fn history(&self) -> Vec<f64> {
        let Some(span) = self.observed_span() else {
            return Vec::new();
        };
        let mut out: Vec<f64> = self.values[span.clone()].to_vec();
        let mask = &self.mask[span];
        let mut prev = 0usize;
        for t in 1..out.len() {
            if mask[t] {
                if t > prev + 1 {
                    let (a, b) = (out[prev], out[t]);
                    let gap = (t - prev) as f64;
                    for (j, slot) in out[prev + 1..t].iter_mut().enumerate() {
                        *slot = a + (b - a) * (j + 1) as f64 / gap;
                    }
                }
                prev = t;
            }
        }
        out
    }
}

/// Train/test protocol: the last `horizon` points of every series are held
/// out, and at most `max_train` points immediately before them are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub max_train: usize,
    pub horizon: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            max_train: 60,
            horizon: 12,
        }
    }
}

impl SplitSpec {
    pub fn new(max_train: usize, horizon: usize) -> Result<Self, SeriesError> {
        let spec = Self { max_train, horizon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SeriesError> {
        if self.max_train == 0 || self.horizon == 0 {
            return Err(SeriesError::InvalidSplit(
                "max_train and horizon must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Seasonal processing needs two full cycles of training data.
    pub fn validate_for_period(&self, period: usize) -> Result<(), SeriesError> {
        self.validate()?;
        if self.max_train < 2 * period {
            return Err(SeriesError::InvalidSplit(format!(
                "max_train {} is shorter than two seasonal cycles of {period}",
                self.max_train
            )));
        }
        Ok(())
    }
}

/// Result of a split that tolerates per-series failures.
#[derive(Debug, Clone)]
pub struct LenientSplit {
    pub train: SeriesMatrix,
    pub test: SeriesMatrix,
    pub rejected: Vec<(String, SeriesError)>,
}

struct RowSplit {
    train: Vec<f64>,
    train_mask: Vec<bool>,
    test: Vec<f64>,
}

fn split_row(view: SeriesView<'_>, spec: &SplitSpec) -> Result<RowSplit, SeriesError> {
    let h = spec.horizon;
    let observed = view.observed();
    let too_short = || SeriesError::TooShort {
        id: view.id().to_string(),
        observed,
        horizon: h,
    };
    if observed <= h {
        return Err(too_short());
    }
    let span = view.observed_span().ok_or_else(too_short)?;
    let end = span.end;
    let test_start = end - h;
    if view.mask()[test_start..end].iter().any(|m| !m) {
        return Err(SeriesError::IncompleteTestWindow {
            id: view.id().to_string(),
        });
    }
    let train_start = span.start.max(test_start.saturating_sub(spec.max_train));
    if view.mask()[train_start..test_start].iter().all(|m| !m) {
        return Err(too_short());
    }
    Ok(RowSplit {
        train: view.raw()[train_start..test_start].to_vec(),
        train_mask: view.mask()[train_start..test_start].to_vec(),
        test: view.raw()[test_start..end].to_vec(),
    })
}

fn assemble(
    ids: Vec<String>,
    rows: Vec<RowSplit>,
    period: usize,
) -> Result<(SeriesMatrix, SeriesMatrix), SeriesError> {
    if rows.is_empty() {
        return Err(SeriesError::Empty);
    }
    let width = rows.iter().map(|r| r.train.len()).max().unwrap_or(0);
    let h = rows[0].test.len();
    let mut values = Vec::with_capacity(rows.len() * width);
    let mut mask = Vec::with_capacity(rows.len() * width);
    let mut test = Vec::with_capacity(rows.len() * h);
    for r in &rows {
        let pad = width - r.train.len();
        values.extend(std::iter::repeat_n(f64::NAN, pad));
        mask.extend(std::iter::repeat_n(false, pad));
        values.extend_from_slice(&r.train);
        mask.extend_from_slice(&r.train_mask);
        test.extend_from_slice(&r.test);
    }
    let train = SeriesMatrix::from_parts(ids.clone(), width, values, mask, period)?;
    let test_mask = vec![true; test.len()];
    let test = SeriesMatrix::from_parts(ids, h, test, test_mask, period)?;
    Ok((train, test))
}

/// Splits every series into a right-aligned training window and a fully
/// observed test window of `spec.horizon` points.
///
/// Series shorter than `max_train + horizon` keep all their pre-test points;
/// the training matrix is as wide as the longest training window and shorter
/// windows are masked on the left.
pub fn split(matrix: &SeriesMatrix, spec: &SplitSpec) -> Result<(SeriesMatrix, SeriesMatrix), SeriesError> {
    spec.validate()?;
    let rows = matrix
        .rows()
        .map(|view| split_row(view, spec))
        .collect::<Result<Vec<_>, _>>()?;
    assemble(matrix.ids().to_vec(), rows, matrix.period())
}

/// Like [`split`] but collects failing series instead of aborting.
pub fn split_lenient(matrix: &SeriesMatrix, spec: &SplitSpec) -> Result<LenientSplit, SeriesError> {
    spec.validate()?;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for view in matrix.rows() {
        match split_row(view, spec) {
            Ok(r) => {
                ids.push(view.id().to_string());
                rows.push(r);
            }
            Err(e) => rejected.push((view.id().to_string(), e)),
        }
    }
    let (train, test) = assemble(ids, rows, matrix.period())?;
    Ok(LenientSplit { train, test, rejected })
}

/// `F' X`: entry `(i, t)` is the inner product of column `i` of `F` (K x N)
/// with column `t` of `X` (K x T), accumulated in latent order.
pub fn reconstruct(f: &Matrix, x: &Matrix) -> Result<Matrix, SeriesError> {
    if f.rows() != x.rows() {
        return Err(SeriesError::ShapeMismatch {
            f_rows: f.rows(),
            f_cols: f.cols(),
            x_rows: x.rows(),
            x_cols: x.cols(),
        });
    }
    let (k, n, t_len) = (f.rows(), f.cols(), x.cols());
    let mut out = Matrix::zeros(n, t_len);
    for i in 0..n {
        let row = out.row_mut(i);
        for (t, cell) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for l in 0..k {
                acc += f[(l, i)] * x[(l, t)];
            }
            *cell = acc;
        }
    }
    Ok(out)
}

/// Per-series affine scaling applied before factorization and undone on
/// the reconstructed forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Mean and standard deviation of the observed values of every row. A
    /// row with zero spread keeps scale 1.
    pub fn fit(matrix: &SeriesMatrix) -> Self {
        let mut shift = Vec::with_capacity(matrix.n_series());
        let mut scale = Vec::with_capacity(matrix.n_series());
        for view in matrix.rows() {
            let obs: Vec<f64> = (0..view.len()).filter_map(|t| view.get(t)).collect();
            let n = obs.len().max(1) as f64;
            let mean = obs.iter().sum::<f64>() / n;
            let var = obs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            shift.push(mean);
            scale.push(if sd > 1e-12 * mean.abs().max(1.0) { sd } else { 1.0 });
        }
        Self { shift, scale }
    }

    /// Identity scaling for `n` series.
    pub fn identity(n: usize) -> Self {
        Self {
            shift: vec![0.0; n],
            scale: vec![1.0; n],
        }
    }

    pub fn apply(&self, matrix: &SeriesMatrix) -> SeriesMatrix {
        let n_cols = matrix.n_cols();
        let values = matrix
            .raw_values()
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let i = idx / n_cols;
                (v - self.shift[i]) / self.scale[i]
            })
            .collect();
        SeriesMatrix::from_parts(
            matrix.ids().to_vec(),
            n_cols,
            values,
            matrix.mask().to_vec(),
            matrix.period(),
        )
        .expect("scaling preserves shape and finiteness")
    }

    /// Maps rows of a scaled N x h matrix back to the original units.
    pub fn invert(&self, scaled: &Matrix) -> Matrix {
        let mut out = scaled.clone();
        for i in 0..out.rows() {
            let (a, b) = (self.scale[i], self.shift[i]);
            for v in out.row_mut(i) {
                *v = *v * a + b;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("S{i}")).collect()
    }

    fn ramp(len: usize) -> Vec<f64> {
        (1..=len).map(|v| v as f64).collect()
    }

    /// Straightforward slicer: the 1-based column ranges of train and test.
    fn brute_force_windows(t: usize, max_train: usize, h: usize) -> (Vec<usize>, Vec<usize>) {
        let mut test = Vec::new();
        let mut train = Vec::new();
        for col in 1..=t {
            if col > t - h {
                test.push(col);
            }
        }
        for col in (1..=t - h).rev() {
            if train.len() == max_train {
                break;
            }
            train.push(col);
        }
        train.reverse();
        (train, test)
    }

    #[test]
    fn split_matches_protocol_examples() {
        for (t, first_train, last_train) in [(72usize, 1.0, 60.0), (13, 1.0, 1.0), (100, 29.0, 88.0)] {
            let m = SeriesMatrix::from_rows(ids(1), &[ramp(t)], 12).unwrap();
            let (train, test) = split(&m, &SplitSpec::default()).unwrap();
            let (bf_train, bf_test) = brute_force_windows(t, 60, 12);
            assert_eq!(train.n_cols(), bf_train.len());
            assert_eq!(test.n_cols(), 12);
            assert_eq!(train.value(0, 0), Some(first_train));
            assert_eq!(train.value(0, train.n_cols() - 1), Some(last_train));
            let got_test: Vec<f64> = (0..12).map(|c| test.value(0, c).unwrap()).collect();
            let want: Vec<f64> = bf_test.iter().map(|&c| c as f64).collect();
            assert_eq!(got_test, want);
        }
    }

    #[test]
    fn split_rejects_short_series_by_id() {
        let m = SeriesMatrix::from_optional_rows(
            vec!["long".into(), "tiny".into()],
            vec![ramp(30).into_iter().map(Some).collect(), ramp(12).into_iter().map(Some).collect()],
            12,
        )
        .unwrap();
        let err = split(&m, &SplitSpec::default()).unwrap_err();
        assert!(matches!(err, SeriesError::TooShort { ref id, .. } if id == "tiny"));
        let lenient = split_lenient(&m, &SplitSpec::default()).unwrap();
        assert_eq!(lenient.train.ids(), ["long"]);
        assert_eq!(lenient.rejected.len(), 1);
    }

    #[test]
    fn ragged_rows_are_right_aligned() {
        let m = SeriesMatrix::from_optional_rows(
            ids(2),
            vec![ramp(20).into_iter().map(Some).collect(), ramp(15).into_iter().map(Some).collect()],
            1,
        )
        .unwrap();
        let (train, test) = split(&m, &SplitSpec::new(10, 3).unwrap()).unwrap();
        assert_eq!(train.n_cols(), 10);
        assert_eq!(train.value(0, 9), Some(17.0));
        assert_eq!(train.value(1, 9), Some(12.0));
        assert_eq!(train.value(1, 0), Some(3.0));
        assert_eq!(test.value(1, 0), Some(13.0));
    }

    #[test]
    fn incomplete_test_window_is_rejected() {
        let mut row: Vec<Option<f64>> = ramp(30).into_iter().map(Some).collect();
        row[25] = None;
        let m = SeriesMatrix::from_optional_rows(ids(1), vec![row], 1).unwrap();
        assert!(matches!(
            split(&m, &SplitSpec::new(10, 6).unwrap()),
            Err(SeriesError::IncompleteTestWindow { .. })
        ));
    }

    #[test]
    fn reconstruct_examples() {
        let f = Matrix::from_rows(&[vec![2.0, 3.0]]).unwrap();
        let x = Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let y = reconstruct(&f, &x).unwrap();
        assert_eq!(y.to_rows(), vec![vec![2.0, 4.0, 6.0], vec![3.0, 6.0, 9.0]]);

        let x = Matrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 4.0], vec![7.0, 8.0]]).unwrap();
        assert_eq!(reconstruct(&Matrix::identity(3), &x).unwrap(), x);

        let zero = reconstruct(&Matrix::zeros(3, 4), &x).unwrap();
        assert!(zero.as_slice().iter().all(|&v| v == 0.0));

        assert!(matches!(
            reconstruct(&Matrix::zeros(2, 4), &x),
            Err(SeriesError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn construction_rejects_invalid_panels() {
        assert_eq!(
            SeriesMatrix::from_rows(vec!["a".into(), "a".into()], &[vec![1.0], vec![2.0]], 1),
            Err(SeriesError::DuplicateId("a".into()))
        );
        assert!(matches!(
            SeriesMatrix::from_rows(ids(1), &[vec![1.0, f64::INFINITY]], 1),
            Err(SeriesError::NonFinite { t: 1, .. })
        ));
        assert_eq!(SeriesMatrix::from_rows(vec![], &[], 1), Err(SeriesError::Empty));
        assert_eq!(SeriesMatrix::from_rows(ids(1), &[vec![1.0]], 0), Err(SeriesError::ZeroPeriod));
    }

    #[test]
    fn history_interpolates_interior_gaps() {
        let m = SeriesMatrix::from_optional_rows(
            ids(1),
            vec![vec![None, Some(1.0), None, None, Some(4.0), Some(5.0), None]],
            1,
        )
        .unwrap();
        assert_eq!(m.row(0).history(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn standardizer_round_trips() {
        let m = SeriesMatrix::from_rows(ids(2), &[vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]], 1).unwrap();
        let s = Standardizer::fit(&m);
        assert_eq!(s.scale[1], 1.0);
        let scaled = s.apply(&m);
        let back = s.invert(&scaled.to_dense_zero_filled());
        for (a, b) in back.as_slice().iter().zip(m.raw_values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
