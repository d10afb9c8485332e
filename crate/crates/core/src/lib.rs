//! Batch forecasting of large panels of related series through a low-rank
//! temporal factorization.
//!
//! The panel `Y` (N series by T steps) is factorized as `Y ≈ FᵀX` with
//! temporally regularized matrix factorization ([`trmf`]); the latent
//! dimension K is picked from the elbow of the reconstruction-error curve
//! ([`rank`]); each of the K latent series is forecast by the median of the
//! three best methods under forward-chaining cross-validation
//! ([`selection`], [`forecasters`]); and the latent forecasts are mapped
//! back through the loadings. [`evaluation`] scores forecasts with sMAPE,
//! MASE and OWA, and [`pipeline`] ties the stages together.

pub mod audit;
pub mod decompose;
pub mod evaluation;
pub mod forecasters;
pub mod io;
pub mod linalg;
pub mod metrics;
mod parallel;
pub mod pipeline;
pub mod rank;
pub mod selection;
pub mod series;
pub mod synthetic;
pub mod trmf;

pub use linalg::Matrix;
pub use series::{SeriesMatrix, SplitSpec};
