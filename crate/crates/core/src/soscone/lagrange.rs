use std::io::Write;

use nalgebra::DMatrix;

use super::basis::{scaled_chebyshev_basis, BasisMatrix};
use super::SosError;

/// Values of SOS polynomials at a point set, described by the rank-one
/// matrices `A_l = P_l P_l^T` built from the rows of a basis matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeSosCone {
    basis: BasisMatrix,
}

impl LagrangeSosCone {
    pub fn new(basis: BasisMatrix) -> Self {
        Self { basis }
    }

    pub fn basis(&self) -> &BasisMatrix {
        &self.basis
    }

    pub fn num_constraints(&self) -> usize {
        self.basis.num_points()
    }

    /// Side of the Gram matrix.
    pub fn size(&self) -> usize {
        self.basis.dim()
    }

    /// `f_l = A_l . X`.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<Vec<f64>, SosError> {
        let p = self.basis.matrix();
        if x.nrows() != p.ncols() || x.ncols() != p.ncols() {
            return Err(SosError::DimensionMismatch {
                expected: p.ncols(),
                found: x.nrows(),
            });
        }
        let px = p * x;
        Ok((0..p.nrows())
            .map(|l| px.row(l).dot(&p.row(l)))
            .collect())
    }

    /// Dense `A_l`.
    pub fn constraint_matrix(&self, l: usize) -> DMatrix<f64> {
        let r = self.basis.matrix().row(l).transpose();
        &r * r.transpose()
    }

    pub fn trace(&self, l: usize) -> f64 {
        self.basis.matrix().row(l).norm_squared()
    }

    /// Writes `l,i,j,value` for the upper triangle of every `A_l`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "l,i,j,value")?;
        for l in 0..self.num_constraints() {
            let a = self.constraint_matrix(l);
            for j in 0..a.ncols() {
                for i in 0..=j {
                    writeln!(w, "{l},{i},{j},{:e}", a[(i, j)])?;
                }
            }
        }
        Ok(())
    }
}

/// Cone of value vectors of `SOS_{2k}` on the first-kind grid of `2k+1`
/// points.
pub fn lagrange_sos_cone(k: usize) -> LagrangeSosCone {
    LagrangeSosCone::new(scaled_chebyshev_basis(k))
}
