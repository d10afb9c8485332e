//! Temporal regularized matrix factorization.
//!
//! Fits `Y ≈ F' X` on the observed entries of a panel while pulling every
//! latent series (row of `X`) towards an autoregressive process over a fixed
//! lag set. The objective is
//!
//! ```text
//! sum_{(i,t) observed} (Y_it - f_i' x_t)^2
//!   + lambda_f ||F||^2
//!   + lambda_x [ sum_k sum_{t >= max(L)} (x_kt - sum_l theta_kl x_{k,t-l})^2 + eta ||X||^2 ]
//!   + lambda_theta ||theta||^2
//! ```
//!
//! and is minimized by cyclic block updates: ridge regressions for every
//! loading vector `f_i`, one sweep of exact per-time-step updates of `x_t`,
//! and a ridge autoregression for the lag weights of every latent series.
//! Each block update is an exact (constrained, when non-negativity is on)
//! minimizer of the objective in its block, so the objective never rises.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, nonneg_quadratic_min, Cholesky, Matrix};
use crate::metrics::{masked_seasonal_scale, MetricError};
use crate::parallel;
use crate::series::{reconstruct, SeriesMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrmfError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training panel has {have} columns, the lag set needs at least {need}")]
    TooFewColumns { have: usize, need: usize },
    #[error("singular {block} solve at index {index} in iteration {iteration}; add regularization")]
    Singular {
        block: Block,
        index: usize,
        iteration: usize,
    },
    #[error("objective became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("{block} update raised the objective from {before} to {after} at iteration {iteration}")]
    Monotonicity {
        block: Block,
        iteration: usize,
        before: f64,
        after: f64,
    },
    #[error("model and panel disagree: {0}")]
    Shape(String),
    #[error("every series has a degenerate seasonal scale")]
    AllDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    Loadings,
    Temporal,
    Lags,
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Block::Loadings => "loading (F)",
            Block::Temporal => "temporal (X)",
            Block::Lags => "lag-weight (theta)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrmfConfig {
    /// Latent dimension K.
    pub rank: usize,
    /// Ascending autoregressive lags.
    pub lags: Vec<usize>,
    pub lambda_f: f64,
    pub lambda_x: f64,
    pub lambda_theta: f64,
    pub eta: f64,
    pub max_iterations: usize,
    /// Stop once the relative objective decrease of an iteration falls
    /// below this value.
    pub tolerance: f64,
    pub nonnegative_factors: bool,
    pub seed: u64,
    /// Recompute the objective around every block update and fail on any
    /// increase. Always on in debug builds.
    pub block_audit: bool,
}

impl Default for TrmfConfig {
    fn default() -> Self {
        Self {
            rank: 18,
            lags: (1..=6).collect(),
            lambda_f: 5e-4,
            lambda_x: 5e1,
            lambda_theta: 1e-4,
            eta: 0.25,
            max_iterations: 1000,
            tolerance: 1e-5,
            nonnegative_factors: false,
            seed: 0,
            block_audit: false,
        }
    }
}

impl TrmfConfig {
    pub fn validate(&self) -> Result<(), TrmfError> {
        let bad = |m: &str| Err(TrmfError::InvalidConfig(m.to_string()));
        if self.rank == 0 {
            return bad("rank must be at least 1");
        }
        if self.lags.iter().any(|&l| l == 0) || self.lags.windows(2).any(|w| w[0] >= w[1]) {
            return bad("lags must be positive and strictly ascending");
        }
        for (name, v) in [
            ("lambda_f", self.lambda_f),
            ("lambda_x", self.lambda_x),
            ("lambda_theta", self.lambda_theta),
            ("eta", self.eta),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(&format!("{name} must be finite and non-negative"));
            }
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        Ok(())
    }

    pub fn max_lag(&self) -> usize {
        self.lags.last().copied().unwrap_or(0)
    }
}

/// Fitted factors, lag weights and convergence record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrmfModel {
    pub config: TrmfConfig,
    /// K x N loadings; column `i` is `f_i`.
    pub factors: Matrix,
    /// K x T latent series; column `t` is `x_t`.
    pub temporal: Matrix,
    /// K x |L| lag weights.
    pub theta: Matrix,
    /// Objective after every completed iteration.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

impl TrmfModel {
    pub fn rank(&self) -> usize {
        self.factors.rows()
    }

    pub fn n_series(&self) -> usize {
        self.factors.cols()
    }

    pub fn n_steps(&self) -> usize {
        self.temporal.cols()
    }

    pub fn lags(&self) -> &[usize] {
        &self.config.lags
    }

    /// `F' X`, an N x T matrix.
    pub fn reconstruct(&self) -> Matrix {
        reconstruct(&self.factors, &self.temporal).expect("fitted factors agree")
    }

    /// Latent forecasts from the learned lag weights.
    pub fn ar_forecast(&self, horizon: usize) -> Result<Matrix, TrmfError> {
        ar_extend(&self.temporal, &self.theta, self.lags(), horizon)
    }

    /// MASE of the reconstruction against the observed training entries.
    pub fn reconstruction_error(&self, train: &SeriesMatrix) -> Result<ReconstructionError, TrmfError> {
        reconstruction_error(self, train)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Recursively extends every row of `history` (K x T) by `horizon` steps
/// with `x_{k,t+1} = sum_l theta_kl x_{k,t+1-l}`.
pub fn ar_extend(history: &Matrix, theta: &Matrix, lags: &[usize], horizon: usize) -> Result<Matrix, TrmfError> {
    let k = history.rows();
    if theta.rows() != k || theta.cols() != lags.len() {
        return Err(TrmfError::Shape(format!(
            "theta is {}x{}, expected {k}x{}",
            theta.rows(),
            theta.cols(),
            lags.len()
        )));
    }
    let t_len = history.cols();
    let max_lag = lags.last().copied().unwrap_or(0);
    if t_len < max_lag {
        return Err(TrmfError::TooFewColumns {
            have: t_len,
            need: max_lag,
        });
    }
    let mut out = Matrix::zeros(k, horizon);
    let mut buf = Vec::with_capacity(t_len + horizon);
    for row in 0..k {
        buf.clear();
        buf.extend_from_slice(history.row(row));
        let weights = theta.row(row);
        for j in 0..horizon {
            let now = t_len + j;
            let next: f64 = lags.iter().zip(weights).map(|(&l, &w)| w * buf[now - l]).sum();
            buf.push(next);
            out[(row, j)] = next;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionError {
    /// `None` for series with a degenerate or unavailable seasonal scale.
    pub per_series: Vec<Option<f64>>,
    /// Mean over the non-degenerate series.
    pub aggregate: f64,
    pub degenerate: usize,
}

pub fn reconstruction_error(model: &TrmfModel, train: &SeriesMatrix) -> Result<ReconstructionError, TrmfError> {
    if model.n_series() != train.n_series() || model.n_steps() != train.n_cols() {
        return Err(TrmfError::Shape(format!(
            "model is {}x{}, panel is {}x{}",
            model.n_series(),
            model.n_steps(),
            train.n_series(),
            train.n_cols()
        )));
    }
    let fitted = model.reconstruct();
    let per_series: Vec<Option<f64>> = (0..train.n_series())
        .map(|i| {
            let view = train.row(i);
            let scale = match masked_seasonal_scale(view.raw(), view.mask(), train.period()) {
                Ok(s) => s,
                Err(MetricError::DegenerateScale | MetricError::InsufficientHistory { .. }) => return None,
                Err(_) => return None,
            };
            let (sum, count) = (0..view.len())
                .filter_map(|t| view.get(t).map(|y| (y - fitted[(i, t)]).abs()))
                .fold((0.0, 0usize), |(s, c), e| (s + e, c + 1));
            (count > 0).then(|| sum / count as f64 / scale)
        })
        .collect();
    let valid: Vec<f64> = per_series.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(TrmfError::AllDegenerate);
    }
    Ok(ReconstructionError {
        aggregate: valid.iter().sum::<f64>() / valid.len() as f64,
        degenerate: per_series.len() - valid.len(),
        per_series,
    })
}

/// Objective value of the given factors on `train`.
pub fn objective(
    train: &SeriesMatrix,
    factors: &Matrix,
    temporal: &Matrix,
    theta: &Matrix,
    config: &TrmfConfig,
) -> f64 {
    let problem = Problem::new(train, config);
    let state = State {
        loadings: factors.transpose(),
        latent: temporal.transpose(),
        theta: theta.clone(),
    };
    problem.objective(&state)
}

/// Factor layout used while fitting: one contiguous K-vector per series and
/// per time step.
struct State {
    /// N x K.
    loadings: Matrix,
    /// T x K.
    latent: Matrix,
    /// K x |L|.
    theta: Matrix,
}

/// Rows (or columns) sharing the same observation pattern share a Gram
/// matrix.
struct PatternGroup {
    members: Vec<usize>,
    observed: Vec<usize>,
    missing: Vec<usize>,
}

fn group_patterns(n: usize, observed_of: impl Fn(usize) -> Vec<bool>) -> Vec<PatternGroup> {
    let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut groups: Vec<PatternGroup> = Vec::new();
    for member in 0..n {
        let pattern = observed_of(member);
        let slot = *index.entry(pattern.clone()).or_insert_with(|| {
            groups.push(PatternGroup {
                members: Vec::new(),
                observed: (0..pattern.len()).filter(|&j| pattern[j]).collect(),
                missing: (0..pattern.len()).filter(|&j| !pattern[j]).collect(),
            });
            groups.len() - 1
        });
        groups[slot].members.push(member);
    }
    groups
}

struct Problem<'a> {
    config: &'a TrmfConfig,
    k: usize,
    n: usize,
    t_len: usize,
    values: &'a [f64],
    mask: &'a [bool],
    row_groups: Vec<PatternGroup>,
    col_groups: Vec<PatternGroup>,
    /// Group index of every time step.
    col_group_of: Vec<usize>,
}

impl<'a> Problem<'a> {
    fn new(train: &'a SeriesMatrix, config: &'a TrmfConfig) -> Self {
        let (n, t_len) = (train.n_series(), train.n_cols());
        let mask = train.mask();
        let row_groups = group_patterns(n, |i| mask[i * t_len..(i + 1) * t_len].to_vec());
        let col_groups = group_patterns(t_len, |t| (0..n).map(|i| mask[i * t_len + t]).collect());
        let mut col_group_of = vec![0; t_len];
        for (g, group) in col_groups.iter().enumerate() {
            for &t in &group.members {
                col_group_of[t] = g;
            }
        }
        Self {
            config,
            k: config.rank,
            n,
            t_len,
            values: train.raw_values(),
            mask,
            row_groups,
            col_groups,
            col_group_of,
        }
    }

    fn y(&self, i: usize, t: usize) -> Option<f64> {
        let idx = i * self.t_len + t;
        self.mask[idx].then(|| self.values[idx])
    }

    fn ar_residual(&self, latent: &Matrix, theta: &Matrix, k: usize, s: usize) -> f64 {
        let mut r = latent[(s, k)];
        for (j, &l) in self.config.lags.iter().enumerate() {
            r -= theta[(k, j)] * latent[(s - l, k)];
        }
        r
    }

    fn objective(&self, st: &State) -> f64 {
        let c = self.config;
        let mut data = 0.0;
        for i in 0..self.n {
            let f = st.loadings.row(i);
            for t in 0..self.t_len {
                if let Some(y) = self.y(i, t) {
                    let e = y - dot(f, st.latent.row(t));
                    data += e * e;
                }
            }
        }
        let mut ar = 0.0;
        if !c.lags.is_empty() {
            for k in 0..self.k {
                for s in c.max_lag()..self.t_len {
                    let r = self.ar_residual(&st.latent, &st.theta, k, s);
                    ar += r * r;
                }
            }
        }
        data + c.lambda_f * st.loadings.frobenius_sq()
            + c.lambda_x * (ar + c.eta * st.latent.frobenius_sq())
            + c.lambda_theta * st.theta.frobenius_sq()
    }

    /// Sum of outer products of the selected rows of `vectors`, either
    /// directly or by subtracting the excluded rows from `full`.
    fn group_gram(&self, vectors: &Matrix, full: &[f64], group: &PatternGroup) -> Vec<f64> {
        let k = self.k;
        let (mut gram, rows, sign) = if group.missing.len() < group.observed.len() {
            (full.to_vec(), &group.missing, -1.0)
        } else {
            (vec![0.0; k * k], &group.observed, 1.0)
        };
        for &r in rows {
            let v = vectors.row(r);
            for a in 0..k {
                let va = sign * v[a];
                for b in 0..=a {
                    gram[a * k + b] += va * v[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                gram[b * k + a] = gram[a * k + b];
            }
        }
        gram
    }

    fn full_gram(&self, vectors: &Matrix) -> Vec<f64> {
        let k = self.k;
        let mut gram = vec![0.0; k * k];
        for r in 0..vectors.rows() {
            let v = vectors.row(r);
            for a in 0..k {
                for b in 0..=a {
                    gram[a * k + b] += v[a] * v[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                gram[b * k + a] = gram[a * k + b];
            }
        }
        gram
    }

    fn update_loadings(&self, st: &mut State, iteration: usize) -> Result<(), TrmfError> {
        let k = self.k;
        let lambda = self.config.lambda_f;
        let nonneg = self.config.nonnegative_factors;
        let full = self.full_gram(&st.latent);
        let latent = &st.latent;
        let mut updates: Vec<(usize, Vec<f64>)> = Vec::with_capacity(self.n);
        for group in &self.row_groups {
            if group.observed.is_empty() {
                updates.extend(group.members.iter().map(|&i| (i, vec![0.0; k])));
                continue;
            }
            let mut a = self.group_gram(latent, &full, group);
            for d in 0..k {
                a[d * k + d] += lambda;
            }
            let chol = if nonneg {
                None
            } else {
                Some(Cholesky::factor(&a, k).ok_or(TrmfError::Singular {
                    block: Block::Loadings,
                    index: group.members[0],
                    iteration,
                })?)
            };
            let solved = parallel::map(&group.members, |&i| {
                let mut b = vec![0.0; k];
                for &t in &group.observed {
                    let y = self.values[i * self.t_len + t];
                    for (bj, xj) in b.iter_mut().zip(latent.row(t)) {
                        *bj += y * xj;
                    }
                }
                match &chol {
                    Some(c) => c.solve_in_place(&mut b),
                    None => {
                        let mut x = st.loadings.row(i).to_vec();
                        nonneg_quadratic_min(&a, &b, &mut x, 100);
                        b = x;
                    }
                }
                (i, b)
            });
            updates.extend(solved);
        }
        for (i, f) in updates {
            st.loadings.row_mut(i).copy_from_slice(&f);
        }
        Ok(())
    }

    fn update_latent(&self, st: &mut State, iteration: usize) -> Result<(), TrmfError> {
        let k = self.k;
        let c = self.config;
        let max_lag = c.max_lag();
        let full = self.full_gram(&st.loadings);
        let grams: Vec<Vec<f64>> = self
            .col_groups
            .iter()
            .map(|g| self.group_gram(&st.loadings, &full, g))
            .collect();
        let mut a = vec![0.0; k * k];
        let mut b = vec![0.0; k];
        for t in 0..self.t_len {
            a.copy_from_slice(&grams[self.col_group_of[t]]);
            b.iter_mut().for_each(|v| *v = 0.0);
            for &i in &self.col_groups[self.col_group_of[t]].observed {
                let y = self.values[i * self.t_len + t];
                for (bj, fj) in b.iter_mut().zip(st.loadings.row(i)) {
                    *bj += y * fj;
                }
            }
            for kk in 0..k {
                let x_now = st.latent[(t, kk)];
                let mut quad = c.eta;
                let mut lin = 0.0;
                if !c.lags.is_empty() {
                    if t >= max_lag {
                        let rest = self.ar_residual(&st.latent, &st.theta, kk, t) - x_now;
                        quad += 1.0;
                        lin -= rest;
                    }
                    for (j, &l) in c.lags.iter().enumerate() {
                        let s = t + l;
                        if s >= max_lag && s < self.t_len {
                            let coef = -st.theta[(kk, j)];
                            let rest = self.ar_residual(&st.latent, &st.theta, kk, s) - coef * x_now;
                            quad += coef * coef;
                            lin -= coef * rest;
                        }
                    }
                }
                a[kk * k + kk] += c.lambda_x * quad;
                b[kk] += c.lambda_x * lin;
            }
            if c.nonnegative_factors {
                let mut x = st.latent.row(t).to_vec();
                nonneg_quadratic_min(&a, &b, &mut x, 100);
                st.latent.row_mut(t).copy_from_slice(&x);
            } else {
                let chol = Cholesky::factor(&a, k).ok_or(TrmfError::Singular {
                    block: Block::Temporal,
                    index: t,
                    iteration,
                })?;
                chol.solve_in_place(&mut b);
                st.latent.row_mut(t).copy_from_slice(&b);
            }
        }
        Ok(())
    }

    fn update_theta(&self, st: &mut State, iteration: usize) -> Result<(), TrmfError> {
        let c = self.config;
        let p = c.lags.len();
        if p == 0 || (c.lambda_x == 0.0 && c.lambda_theta == 0.0) {
            return Ok(());
        }
        let max_lag = c.max_lag();
        let rows: Vec<usize> = (0..self.k).collect();
        let latent = &st.latent;
        let solved = parallel::map(&rows, |&kk| {
            let mut a = vec![0.0; p * p];
            let mut b = vec![0.0; p];
            for s in max_lag..self.t_len {
                let target = latent[(s, kk)];
                for (u, &lu) in c.lags.iter().enumerate() {
                    let zu = latent[(s - lu, kk)];
                    b[u] += c.lambda_x * zu * target;
                    for (v, &lv) in c.lags.iter().enumerate().take(u + 1) {
                        a[u * p + v] += c.lambda_x * zu * latent[(s - lv, kk)];
                    }
                }
            }
            for u in 0..p {
                for v in 0..u {
                    a[v * p + u] = a[u * p + v];
                }
                a[u * p + u] += c.lambda_theta;
            }
            let chol = Cholesky::factor(&a, p)?;
            chol.solve_in_place(&mut b);
            Some(b)
        });
        for (kk, weights) in solved.into_iter().enumerate() {
            let weights = weights.ok_or(TrmfError::Singular {
                block: Block::Lags,
                index: kk,
                iteration,
            })?;
            st.theta.row_mut(kk).copy_from_slice(&weights);
        }
        Ok(())
    }
}

/// Fits the factorization by alternating block minimization.
pub fn fit(train: &SeriesMatrix, config: &TrmfConfig) -> Result<TrmfModel, TrmfError> {
    config.validate()?;
    let need = config.max_lag() + 2;
    if train.n_cols() < need {
        return Err(TrmfError::TooFewColumns {
            have: train.n_cols(),
            need,
        });
    }
    let problem = Problem::new(train, config);
    let (k, n, t_len) = (config.rank, problem.n, problem.t_len);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 0.1).expect("valid spread");
    let mut draw = |rows: usize, cols: usize| {
        let data = (0..rows * cols)
            .map(|_| {
                let v: f64 = normal.sample(&mut rng);
                if config.nonnegative_factors {
                    v.abs()
                } else {
                    v
                }
            })
            .collect();
        Matrix::from_vec(rows, cols, data).expect("shape")
    };
    let loadings = draw(n, k);
    let latent = draw(t_len, k);
    let p = config.lags.len();
    let theta = Matrix::from_vec(k, p, vec![1.0 / p.max(1) as f64; k * p]).expect("shape");
    let mut state = State {
        loadings,
        latent,
        theta,
    };

    let audit = config.block_audit || cfg!(debug_assertions);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut current = if audit { problem.objective(&state) } else { f64::NAN };
    for iteration in 0..config.max_iterations {
        for block in [Block::Loadings, Block::Temporal, Block::Lags] {
            match block {
                Block::Loadings => problem.update_loadings(&mut state, iteration)?,
                Block::Temporal => problem.update_latent(&mut state, iteration)?,
                Block::Lags => problem.update_theta(&mut state, iteration)?,
            }
            if audit {
                let after = problem.objective(&state);
                if after > current * (1.0 + 1e-10) + 1e-300 {
                    return Err(TrmfError::Monotonicity {
                        block,
                        iteration,
                        before: current,
                        after,
                    });
                }
                current = after;
            }
        }
        let value = if audit { current } else { problem.objective(&state) };
        if !value.is_finite() {
            return Err(TrmfError::NonFinite { iteration });
        }
        let previous = trace.last().copied();
        trace.push(value);
        if value == 0.0 {
            converged = true;
            break;
        }
        if let Some(prev) = previous {
            if (prev - value) / prev.abs().max(f64::MIN_POSITIVE) < config.tolerance {
                converged = true;
                break;
            }
        }
    }

    let model = TrmfModel {
        config: config.clone(),
        factors: state.loadings.transpose(),
        temporal: state.latent.transpose(),
        theta: state.theta,
        objective_trace: trace,
        converged,
    };
    if !(model.factors.is_finite() && model.temporal.is_finite() && model.theta.is_finite()) {
        return Err(TrmfError::NonFinite {
            iteration: model.objective_trace.len(),
        });
    }
    Ok(model)
}
