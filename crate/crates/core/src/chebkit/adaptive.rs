use super::grid::InterpolationGrid;
use super::interp::Interpolant;
use super::transform::values_to_coeffs;
use super::ChebError;

/// Largest grid degree tried by [`adaptive_interpolate`].
pub const ADAPTIVE_CAP: usize = 1 << 15;

const PROBE_FLOOR: f64 = 100.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub tol: f64,
    pub start: usize,
    pub cap: usize,
}

impl AdaptiveOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            start: 16,
            cap: ADAPTIVE_CAP,
        }
    }
}

/// Interpolate `f` on Cheb2 grids of doubling size until it is resolved to
/// `tol` relative to `max|f|`.
pub fn adaptive_interpolate(f: impl Fn(f64) -> f64, tol: f64) -> Result<Interpolant, ChebError> {
    adaptive_interpolate_with(f, AdaptiveOptions::new(tol))
}

/// Convergence needs both a small coefficient tail and agreement between the
/// interpolant and fresh samples at the first-kind points of half the size,
/// which are never grid points.
pub fn adaptive_interpolate_with(
    f: impl Fn(f64) -> f64,
    opts: AdaptiveOptions,
) -> Result<Interpolant, ChebError> {
    if !(opts.tol > 0.0) {
        return Err(ChebError::InvalidArgument("tol must be positive".into()));
    }
    // rounding in the samples alone puts coefficients near a few ulps, and
    // fresh samples of f carry f's own evaluation error, which for steep
    // functions such as exp(t^100) is tens of ulps
    let tol = opts.tol.max(4.0 * f64::EPSILON);
    let probe_tol = opts.tol.max(PROBE_FLOOR);
    let mut n = opts.start.max(2);
    let mut last = f64::INFINITY;
    while n <= opts.cap {
        let grid = InterpolationGrid::cheb2(n)?;
        let p = Interpolant::from_fn(grid, &f);
        let scale = p.max_abs();
        if !scale.is_finite() {
            return Err(ChebError::InvalidArgument("sampler returned a non-finite value".into()));
        }
        if scale == 0.0 {
            return Ok(p);
        }
        let c = values_to_coeffs(p.grid(), p.values())?;
        let m = (n / 8).max(2);
        let tail = c[c.len() - m..].iter().fold(0.0f64, |a, x| a.max(x.abs())) / scale;
        let mut residual = tail;
        if tail <= tol {
            let probe = InterpolationGrid::cheb1(n / 2);
            let pred = probe
                .points()
                .iter()
                .map(|&t| (p.eval(t) - f(t)).abs())
                .fold(0.0f64, f64::max)
                / scale;
            residual = residual.max(pred);
            if pred <= probe_tol {
                log::debug!("adaptive_interpolate converged at n = {n}, residual {residual:e}");
                return Ok(p);
            }
        }
        last = residual;
        n *= 2;
    }
    Err(ChebError::NotConverged {
        residual: last,
        n: n / 2,
    })
}
