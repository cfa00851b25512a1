//! Semidefinite descriptions of cones of nonnegative interpolants.

mod basis;
mod certify;
mod hermite;
mod interval;
mod lagrange;

pub use basis::{
    dual_matrix, orthonormalize_at_points, scaled_chebyshev_basis, weighted_chebyshev_basis,
    BasisMatrix, Weight,
};
pub use certify::{certify_nonneg, Certificate};
pub use hermite::{hermite_sos_cone, HermiteSosCone};
pub use interval::{interval_nonneg_cone, IntervalNonnegCone};
pub use lagrange::{lagrange_sos_cone, LagrangeSosCone};


use thiserror::Error;

use crate::chebkit::ChebError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SosError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("numerically rank deficient at column {column} (|r_ii| / max = {ratio:e})")]
    RankDeficient { column: usize, ratio: f64 },
    #[error(transparent)]
    Cheb(#[from] ChebError),
    #[error("solver: {0}")]
    Solver(String),
}
