use nalgebra::DMatrix;

use super::grid::{GridKind, InterpolationGrid};
use super::ChebError;

/// Linear map taking values on `source` to values of the same polynomial on
/// `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpsampleMatrix {
    pub b: DMatrix<f64>,
    pub source: InterpolationGrid,
    pub target: InterpolationGrid,
}

impl UpsampleMatrix {
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        (0..self.b.nrows())
            .map(|j| self.b.row(j).iter().zip(values).map(|(b, v)| b * v).sum())
            .collect()
    }

    /// `B^T z`.
    pub fn apply_transpose(&self, z: &[f64]) -> Vec<f64> {
        (0..self.b.ncols())
            .map(|l| self.b.column(l).iter().zip(z).map(|(b, v)| b * v).sum())
            .collect()
    }
}

/// Barycentric Lagrange basis values of `source` at every `target` point.
///
/// General source grids are refused: their interpolation matrices can be
/// arbitrarily ill-conditioned.
pub fn upsample_matrix(
    source: &InterpolationGrid,
    target: &InterpolationGrid,
) -> Result<UpsampleMatrix, ChebError> {
    if source.kind() == GridKind::General {
        log::warn!("upsample_matrix called with a general source grid");
        return Err(ChebError::GeneralGrid("upsampling from a source grid"));
    }
    if target.degree() < source.degree() {
        return Err(ChebError::InvalidArgument(format!(
            "target degree {} below source degree {}",
            target.degree(),
            source.degree()
        )));
    }
    let w = source.barycentric_weights();
    let sp = source.points();
    let mut b = DMatrix::zeros(target.len(), source.len());
    for (j, &x) in target.points().iter().enumerate() {
        if let Some(l) = sp.iter().position(|&t| t == x) {
            b[(j, l)] = 1.0;
            continue;
        }
        let c: Vec<f64> = sp.iter().zip(&w).map(|(t, wl)| wl / (x - t)).collect();
        let s: f64 = c.iter().sum();
        for (l, cl) in c.iter().enumerate() {
            b[(j, l)] = cl / s;
        }
    }
    Ok(UpsampleMatrix {
        b,
        source: source.clone(),
        target: target.clone(),
    })
}
