//! Choosing the latent dimension from the elbow of the
//! reconstruction-error-versus-rank curve.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::parallel;
use crate::series::SeriesMatrix;
use crate::trmf::{fit, TrmfConfig, TrmfError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RankError {
    #[error("elbow detection needs at least 3 candidates, got {0}")]
    TooFewPoints(usize),
    #[error("{ks} candidate ranks but {errors} errors")]
    LengthMismatch { ks: usize, errors: usize },
    #[error("candidate ranks must be positive and strictly ascending")]
    NotAscending,
    #[error("rank {k} must be below min(N, T) = {limit}")]
    RankTooLarge { k: usize, limit: usize },
    #[error("error curve contains non-finite values")]
    NonFinite,
    #[error("fit with K = {k} failed: {source}")]
    Fit { k: usize, source: TrmfError },
    #[error("malformed curve file: {0}")]
    Parse(String),
}

/// Reconstruction error as a function of the latent dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowCurve {
    pub ks: Vec<usize>,
    pub errors: Vec<f64>,
}

impl ElbowCurve {
    pub fn new(ks: Vec<usize>, errors: Vec<f64>) -> Result<Self, RankError> {
        if ks.len() != errors.len() {
            return Err(RankError::LengthMismatch {
                ks: ks.len(),
                errors: errors.len(),
            });
        }
        if ks.first() == Some(&0) || ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RankError::NotAscending);
        }
        if errors.iter().any(|e| !e.is_finite()) {
            return Err(RankError::NonFinite);
        }
        Ok(Self { ks, errors })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "mase"])?;
        for (k, e) in self.ks.iter().zip(&self.errors) {
            w.write_record([k.to_string(), e.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, RankError> {
        let mut r = csv::Reader::from_reader(reader);
        let mut ks = Vec::new();
        let mut errors = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record.map_err(|e| RankError::Parse(e.to_string()))?;
            let parse_err = |what: &str| RankError::Parse(format!("row {}: bad {what}", line + 2));
            ks.push(record.get(0).and_then(|v| v.parse().ok()).ok_or_else(|| parse_err("k"))?);
            errors.push(record.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| parse_err("mase"))?);
        }
        Self::new(ks, errors)
    }
}

/// Rank grid for monthly data: 2, 4, ..., 30.
pub fn default_grid() -> Vec<usize> {
    (1..=15).map(|i| 2 * i).collect()
}

/// Fits one factorization per candidate rank with otherwise identical
/// settings (including the seed) and records the reconstruction MASE.
pub fn sweep(train: &SeriesMatrix, ks: &[usize], config: &TrmfConfig) -> Result<ElbowCurve, RankError> {
    if ks.first() == Some(&0) || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RankError::NotAscending);
    }
    let limit = train.n_series().min(train.n_cols());
    if let Some(&k) = ks.iter().find(|&&k| k >= limit) {
        return Err(RankError::RankTooLarge { k, limit });
    }
    let results = parallel::map(ks, |&k| {
        let cfg = TrmfConfig {
            rank: k,
            ..config.clone()
        };
        fit(train, &cfg)
            .and_then(|m| m.reconstruction_error(train))
            .map(|e| e.aggregate)
            .map_err(|source| RankError::Fit { k, source })
    });
    let errors = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    ElbowCurve::new(ks.to_vec(), errors)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElbowPick {
    pub k: usize,
    /// Distance of the chosen point from the chord, in normalized units.
    pub distance: f64,
    /// No point stands off the chord; `k` is the smallest candidate.
    pub flat: bool,
}

/// Picks the candidate farthest from the chord joining the first and last
/// points of the curve, with both axes min-max normalized. Ties go to the
/// smaller rank.
pub fn pick_elbow(curve: &ElbowCurve) -> Result<ElbowPick, RankError> {
    let n = curve.ks.len();
    if n < 3 {
        return Err(RankError::TooFewPoints(n));
    }
    let normalize = |v: &[f64]| -> Option<Vec<f64>> {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi > lo).then(|| v.iter().map(|x| (x - lo) / (hi - lo)).collect())
    };
    let xs: Vec<f64> = curve.ks.iter().map(|&k| k as f64).collect();
    let flat_pick = ElbowPick {
        k: curve.ks[0],
        distance: 0.0,
        flat: true,
    };
    let (Some(x), Some(y)) = (normalize(&xs), normalize(&curve.errors)) else {
        return Ok(flat_pick);
    };
    let (dx, dy) = (x[n - 1] - x[0], y[n - 1] - y[0]);
    let chord = (dx * dx + dy * dy).sqrt();
    let mut best = (0usize, 0.0f64);
    for j in 0..n {
        let d = ((x[j] - x[0]) * dy - (y[j] - y[0]) * dx).abs() / chord;
        if d > best.1 + 1e-12 {
            best = (j, d);
        }
    }
    if best.1 <= 1e-9 {
        return Ok(flat_pick);
    }
    Ok(ElbowPick {
        k: curve.ks[best.0],
        distance: best.1,
        flat: false,
    })
}
