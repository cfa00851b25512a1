use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ChebError;

/// Family an [`InterpolationGrid`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// `cos(l*pi/n)`, endpoints included.
    Cheb2,
    /// `cos((l + 1/2)*pi/(n+1))`, interior points only.
    Cheb1,
    /// Arbitrary distinct points in `[-1, 1]`.
    General,
}

/// Ordered (descending) distinct interpolation points in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationGrid {
    points: Vec<f64>,
    kind: GridKind,
}

impl InterpolationGrid {
    /// Chebyshev points of the second kind, `n + 1` of them.
    pub fn cheb2(n: usize) -> Result<Self, ChebError> {
        if n == 0 {
            return Err(ChebError::InvalidArgument(
                "second-kind Chebyshev grid needs n >= 1".into(),
            ));
        }
        // sin form keeps the grid exactly symmetric with exact 0 and +-1.
        let points = (0..=n)
            .map(|l| {
                let m = n as f64 - 2.0 * l as f64;
                (PI * m / (2.0 * n as f64)).sin()
            })
            .collect();
        Ok(Self {
            points,
            kind: GridKind::Cheb2,
        })
    }

    /// Chebyshev points of the first kind, `n + 1` of them.
    pub fn cheb1(n: usize) -> Self {
        let points = (0..=n)
            .map(|l| {
                let m = n as f64 - 2.0 * l as f64;
                (PI * m / (2.0 * (n as f64 + 1.0))).sin()
            })
            .collect();
        Self {
            points,
            kind: GridKind::Cheb1,
        }
    }

    /// Arbitrary distinct points in `[-1, 1]`; stored in descending order.
    pub fn general(mut points: Vec<f64>) -> Result<Self, ChebError> {
        if points.is_empty() {
            return Err(ChebError::InvalidArgument("empty grid".into()));
        }
        if let Some(bad) = points
            .iter()
            .find(|t| !t.is_finite() || t.abs() > 1.0)
        {
            return Err(ChebError::InvalidArgument(format!(
                "grid point {bad} outside [-1, 1]"
            )));
        }
        points.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(ChebError::InvalidArgument("grid points must be distinct".into()));
        }
        Ok(Self {
            points,
            kind: GridKind::General,
        })
    }

    /// Rebuild a Chebyshev grid from its tag and degree.
    pub fn from_kind(kind: GridKind, n: usize) -> Result<Self, ChebError> {
        match kind {
            GridKind::Cheb2 => Self::cheb2(n),
            GridKind::Cheb1 => Ok(Self::cheb1(n)),
            GridKind::General => Err(ChebError::InvalidArgument(
                "general grids need explicit points".into(),
            )),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Polynomial degree supported by the grid (`len - 1`).
    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_chebyshev(&self) -> bool {
        self.kind != GridKind::General
    }

    /// Barycentric weights, normalized so that `max |w| = 1`.
    pub fn barycentric_weights(&self) -> Vec<f64> {
        let n = self.degree();
        match self.kind {
            GridKind::Cheb2 => (0..=n)
                .map(|l| {
                    let s = if l % 2 == 0 { 1.0 } else { -1.0 };
                    if l == 0 || l == n {
                        0.5 * s
                    } else {
                        s
                    }
                })
                .collect(),
            GridKind::Cheb1 => {
                let raw: Vec<f64> = (0..=n)
                    .map(|l| {
                        let s = if l % 2 == 0 { 1.0 } else { -1.0 };
                        s * ((2 * l + 1) as f64 * PI / (2 * n + 2) as f64).sin()
                    })
                    .collect();
                normalize_max(raw)
            }
            GridKind::General => general_weights(&self.points),
        }
    }
}

fn normalize_max(mut w: Vec<f64>) -> Vec<f64> {
    let m = w.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if m > 0.0 {
        w.iter_mut().for_each(|x| *x /= m);
    }
    w
}

// Product formula evaluated in log space; the factor 2 rescales [-1, 1]
// to unit capacity so the products stay O(1) for reasonable point sets.
fn general_weights(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut logs = vec![0.0; n];
    let mut signs = vec![1.0; n];
    for l in 0..n {
        let mut acc = 0.0;
        let mut sign = 1.0;
        for j in 0..n {
            if j != l {
                let d = 2.0 * (points[l] - points[j]);
                acc -= d.abs().ln();
                if d < 0.0 {
                    sign = -sign;
                }
            }
        }
        logs[l] = acc;
        signs[l] = sign;
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.iter()
        .zip(&signs)
        .map(|(lw, s)| s * (lw - top).exp())
        .collect()
}

/// Affine map from `[a, b]` onto `[-1, 1]`.
pub fn to_unit_interval(x: f64, a: f64, b: f64) -> f64 {
    (2.0 * x - a - b) / (b - a)
}

/// Affine map from `[-1, 1]` onto `[a, b]`.
pub fn from_unit_interval(t: f64, a: f64, b: f64) -> f64 {
    0.5 * ((b - a) * t + a + b)
}
