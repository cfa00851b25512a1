use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::grid::{GridKind, InterpolationGrid};
use super::transform::{self, trim_coeffs};
use super::ChebError;

/// A polynomial stored by its values on an interpolation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    grid: InterpolationGrid,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl Interpolant {
    pub fn new(grid: InterpolationGrid, values: Vec<f64>) -> Result<Self, ChebError> {
        if grid.len() != values.len() {
            return Err(ChebError::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        let weights = grid.barycentric_weights();
        Ok(Self {
            grid,
            values,
            weights,
        })
    }

    /// Sample `f` at the grid points.
    pub fn from_fn(grid: InterpolationGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        let weights = grid.barycentric_weights();
        Self {
            grid,
            values,
            weights,
        }
    }

    /// Interpolant of a Chebyshev series on the given grid.
    pub fn from_coeffs(grid: InterpolationGrid, coeffs: &[f64]) -> Self {
        let values = transform::coeffs_to_values(coeffs, &grid);
        let weights = grid.barycentric_weights();
        Self {
            grid,
            values,
            weights,
        }
    }

    pub fn grid(&self) -> &InterpolationGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree(&self) -> usize {
        self.grid.degree()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Barycentric evaluation (second form); exact at grid points.
    pub fn eval(&self, t: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&tl, &fl), &wl) in self.grid.points().iter().zip(&self.values).zip(&self.weights) {
            let d = t - tl;
            if d == 0.0 {
                return fl;
            }
            let c = wl / d;
            num += c * fl;
            den += c;
        }
        num / den
    }

    pub fn eval_many(&self, ts: &[f64]) -> Vec<f64> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }

    /// Derivative of the barycentric form; at grid points falls back to
    /// the Chebyshev series derivative.
    pub fn eval_derivative(&self, t: f64) -> f64 {
        let mut n = 0.0;
        let mut d = 0.0;
        let mut dn = 0.0;
        let mut dd = 0.0;
        for ((&tl, &fl), &wl) in self.grid.points().iter().zip(&self.values).zip(&self.weights) {
            let x = t - tl;
            if x == 0.0 {
                return self.derivative_at_node(t);
            }
            let c = wl / x;
            n += c * fl;
            d += c;
            dn -= c * fl / x;
            dd -= c / x;
        }
        (dn * d - n * dd) / (d * d)
    }

    fn derivative_at_node(&self, t: f64) -> f64 {
        match self.chebyshev_coeffs() {
            Ok(c) => transform::clenshaw(&transform::derivative_coeffs(&c), t),
            Err(_) => {
                // nudge off the node for general grids
                let h = 1e-7;
                (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
            }
        }
    }

    /// Chebyshev coefficients of the interpolant.
    pub fn chebyshev_coeffs(&self) -> Result<Vec<f64>, ChebError> {
        match self.grid.kind() {
            GridKind::General => {
                let n = self.degree().max(1);
                let g2 = InterpolationGrid::cheb2(n)?;
                let vals = self.eval_many(g2.points());
                let mut c = transform::values_to_coeffs(&g2, &vals)?;
                c.truncate(self.degree() + 1);
                Ok(c)
            }
            _ => transform::values_to_coeffs(&self.grid, &self.values),
        }
    }

    /// Values of the same polynomial on another grid.
    pub fn resample(&self, grid: InterpolationGrid) -> Self {
        let values = self.eval_many(grid.points());
        let weights = grid.barycentric_weights();
        Self {
            grid,
            values,
            weights,
        }
    }

    /// Exact derivative as an interpolant on a grid of the same kind.
    pub fn derivative(&self) -> Result<Self, ChebError> {
        let c = self.chebyshev_coeffs()?;
        let dc = transform::derivative_coeffs(&c);
        let n = self.degree().saturating_sub(1).max(1);
        let grid = match self.grid.kind() {
            GridKind::Cheb1 => InterpolationGrid::cheb1(n),
            _ => InterpolationGrid::cheb2(n)?,
        };
        Ok(Self::from_coeffs(grid, &dc))
    }

    /// `int_{-1}^{1} p(t) dt`.
    pub fn integral(&self) -> Result<f64, ChebError> {
        Ok(transform::integrate_coeffs(&self.chebyshev_coeffs()?))
    }

    /// Degree after chopping trailing Chebyshev coefficients below
    /// `rel * max|c|`.
    pub fn effective_degree(&self, rel: f64) -> Result<usize, ChebError> {
        Ok(trim_coeffs(&self.chebyshev_coeffs()?, rel).len() - 1)
    }
}

#[derive(Serialize, Deserialize)]
struct InterpolantRecord {
    kind: GridKind,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<f64>>,
    values: Vec<f64>,
}

impl Serialize for Interpolant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let points = match self.grid.kind() {
            GridKind::General => Some(self.grid.points().to_vec()),
            _ => None,
        };
        InterpolantRecord {
            kind: self.grid.kind(),
            n: self.degree(),
            points,
            values: self.values.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interpolant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let rec = InterpolantRecord::deserialize(d)?;
        let grid = match (rec.kind, rec.points) {
            (GridKind::General, Some(p)) => InterpolationGrid::general(p),
            (GridKind::General, None) => {
                return Err(D::Error::custom("general grid requires points"))
            }
            (k, _) => InterpolationGrid::from_kind(k, rec.n),
        }
        .map_err(D::Error::custom)?;
        if grid.degree() != rec.n {
            return Err(D::Error::custom("n does not match the number of points"));
        }
        Interpolant::new(grid, rec.values).map_err(D::Error::custom)
    }
}
