use nalgebra::DMatrix;

use super::basis::{weighted_chebyshev_basis, BasisMatrix, Weight};
use super::lagrange::LagrangeSosCone;
use super::SosError;
use crate::chebkit::InterpolationGrid;

/// Degree-`n` polynomials nonnegative on `[-1, 1]`, as value vectors on the
/// first-kind grid of `n + 1` points: `p = sum_j w_j(t) q_j(t)` with each
/// `q_j` a sum of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalNonnegCone {
    n: usize,
    grid: InterpolationGrid,
    members: Vec<LagrangeSosCone>,
}

impl IntervalNonnegCone {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &InterpolationGrid {
        &self.grid
    }

    /// One weighted SOS cone per Lukács term; weights are in the basis.
    pub fn members(&self) -> &[LagrangeSosCone] {
        &self.members
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.size()).collect()
    }

    /// Values `p(t_l) = sum_j A_{j,l} . X_j`.
    pub fn apply(&self, xs: &[DMatrix<f64>]) -> Result<Vec<f64>, SosError> {
        if xs.len() != self.members.len() {
            return Err(SosError::DimensionMismatch {
                expected: self.members.len(),
                found: xs.len(),
            });
        }
        let mut f = vec![0.0; self.n + 1];
        for (m, x) in self.members.iter().zip(xs) {
            for (fl, v) in f.iter_mut().zip(m.apply(x)?) {
                *fl += v;
            }
        }
        Ok(f)
    }
}

/// Odd `n = 2k - 1`: weights `1 + t`, `1 - t`, both squared degree `k - 1`.
/// Even `n = 2k`: weight `1 - t^2` with degree `k - 1` and weight 1 with
/// degree `k`. `n = 0` leaves only the constant member.
pub fn interval_nonneg_cone(n: usize) -> Result<IntervalNonnegCone, SosError> {
    let grid = InterpolationGrid::cheb1(n);
    let mut bases: Vec<BasisMatrix> = Vec::with_capacity(2);
    if n % 2 == 1 {
        let k = n.div_ceil(2);
        bases.push(weighted_chebyshev_basis(n, k - 1, Weight::OnePlusT)?);
        bases.push(weighted_chebyshev_basis(n, k - 1, Weight::OneMinusT)?);
    } else {
        let k = n / 2;
        if k >= 1 {
            bases.push(weighted_chebyshev_basis(n, k - 1, Weight::OneMinusTSquared)?);
        }
        bases.push(weighted_chebyshev_basis(n, k, Weight::One)?);
    }
    Ok(IntervalNonnegCone {
        n,
        grid,
        members: bases.into_iter().map(LagrangeSosCone::new).collect(),
    })
}
