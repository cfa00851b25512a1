//! Chebyshev grids, barycentric interpolation, quadrature, upsampling and
//! rootfinding for polynomials on `[-1, 1]`.

mod adaptive;
mod bounds;
mod grid;
mod interp;
mod quadrature;
mod roots;
mod transform;
mod upsample;

pub use adaptive::{adaptive_interpolate, adaptive_interpolate_with, AdaptiveOptions, ADAPTIVE_CAP};
pub use bounds::error_bound_points;
pub use grid::{from_unit_interval, to_unit_interval, GridKind, InterpolationGrid};
pub use interp::Interpolant;
pub use quadrature::{clenshaw_curtis_weights, QuadratureWeights};
pub use roots::{colleague_roots, contact_points, interpolant_roots};
pub use transform::{
    chebyshev_moment, chebyshev_t_values, clenshaw, coeffs_to_values, derivative_coeffs,
    integrate_coeffs, trim_coeffs, values_to_coeffs, values_to_coeffs_explicit,
    values_to_coeffs_fft, EXPLICIT_TRANSFORM_MAX,
};
pub use upsample::{upsample_matrix, UpsampleMatrix};


use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChebError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0} is not available on general grids")]
    GeneralGrid(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("interpolant is identically zero")]
    ZeroInterpolant,
    #[error("adaptive interpolation did not converge (residual {residual:e} at n = {n})")]
    NotConverged { residual: f64, n: usize },
    #[error("eigenvalue iteration failed for colleague matrix of degree {0}")]
    EigenFailure(usize),
}
