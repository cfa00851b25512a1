use serde::{Deserialize, Serialize};

use super::grid::{GridKind, InterpolationGrid};
use super::transform::{chebyshev_moment, cos_reduced};
use super::ChebError;

/// Interpolatory quadrature weights `w_l = int L_l` for a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureWeights {
    pub w: Vec<f64>,
}

impl QuadratureWeights {
    /// `sum_l w_l f_l`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.w.iter().zip(values).map(|(w, f)| w * f).sum()
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Clenshaw–Curtis (second kind) or Fejér (first kind) weights, obtained by
/// pushing the Chebyshev moments through the values-to-coefficients map.
pub fn clenshaw_curtis_weights(grid: &InterpolationGrid) -> Result<QuadratureWeights, ChebError> {
    let n = grid.degree();
    let w = match grid.kind() {
        GridKind::Cheb2 => (0..=n)
            .map(|l| {
                let h = if l == 0 || l == n { 0.5 } else { 1.0 };
                let s: f64 = (0..=n)
                    .step_by(2)
                    .map(|i| {
                        let scale = if i == 0 || i == n { 1.0 } else { 2.0 };
                        scale * chebyshev_moment(i) * cos_reduced(2 * i * l, 2 * n)
                    })
                    .sum();
                h * s / n as f64
            })
            .collect(),
        GridKind::Cheb1 => (0..=n)
            .map(|l| {
                let s: f64 = (0..=n)
                    .step_by(2)
                    .map(|i| {
                        let scale = if i == 0 { 1.0 } else { 2.0 };
                        scale * chebyshev_moment(i) * cos_reduced(i * (2 * l + 1), 2 * (n + 1))
                    })
                    .sum();
                s / (n + 1) as f64
            })
            .collect(),
        GridKind::General => return Err(ChebError::GeneralGrid("quadrature weights")),
    };
    Ok(QuadratureWeights { w })
}
