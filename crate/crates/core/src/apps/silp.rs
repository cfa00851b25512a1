//! Semi-infinite linear programs `A(t) x <= b` for all `t` in `[-1, 1]`.

use nalgebra::DMatrix;

use super::{attach_cone, AppError, Sampler};
use crate::chebkit::{adaptive_interpolate, Interpolant};
use crate::sdp::{BlockKind, BlockSdpProblem, Coef, Sense};
use crate::soscone::interval_nonneg_cone;

/// `f0 + sum_i x_i f_i ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lmi {
    pub f0: DMatrix<f64>,
    pub fi: Vec<DMatrix<f64>>,
}

#[derive(Clone)]
pub struct SemiInfiniteProgram {
    /// `rows[j][i]` is the entry `A_{j,i}(t)`.
    pub rows: Vec<Vec<Sampler>>,
    pub rhs: Vec<f64>,
    pub n_x: usize,
    /// Minimized.
    pub objective: Vec<f64>,
    /// Linear equalities `a . x = b`.
    pub equalities: Vec<(Vec<f64>, f64)>,
    pub lmis: Vec<Lmi>,
}

impl std::fmt::Debug for SemiInfiniteProgram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemiInfiniteProgram")
            .field("m_rows", &self.rows.len())
            .field("n_x", &self.n_x)
            .field("rhs", &self.rhs)
            .field("objective", &self.objective)
            .finish_non_exhaustive()
    }
}

impl SemiInfiniteProgram {
    pub fn new(n_x: usize) -> Self {
        Self {
            rows: Vec::new(),
            rhs: Vec::new(),
            n_x,
            objective: vec![0.0; n_x],
            equalities: Vec::new(),
            lmis: Vec::new(),
        }
    }

    pub fn add_row(&mut self, entries: Vec<Sampler>, b: f64) -> &mut Self {
        self.rows.push(entries);
        self.rhs.push(b);
        self
    }

    fn validate(&self) -> Result<(), AppError> {
        let bad = |s: String| Err(AppError::InvalidArgument(s));
        if self.rows.len() != self.rhs.len() {
            return bad("rows and rhs differ in length".into());
        }
        if let Some(j) = self.rows.iter().position(|r| r.len() != self.n_x) {
            return bad(format!("row {j} does not have {} entries", self.n_x));
        }
        if self.objective.len() != self.n_x {
            return bad("objective length differs from n_x".into());
        }
        for (a, _) in &self.equalities {
            if a.len() != self.n_x {
                return bad("equality of wrong length".into());
            }
        }
        for l in &self.lmis {
            let k = l.f0.nrows();
            if l.fi.len() != self.n_x || l.f0.ncols() != k || l.fi.iter().any(|f| f.shape() != (k, k)) {
                return bad("inconsistent LMI dimensions".into());
            }
        }
        Ok(())
    }
}

/// The SDP and the interpolated rows.
#[derive(Debug, Clone)]
pub struct SilpSdp {
    pub problem: BlockSdpProblem,
    pub x_block: usize,
    /// Degree of the nonnegativity constraint of every row.
    pub row_degrees: Vec<usize>,
    /// `row_interpolants[j][i]` on the row's common grid.
    pub row_interpolants: Vec<Vec<Interpolant>>,
}

impl SilpSdp {
    /// Values of the residual `b_j - sum_i x_i A_{j,i}` on row `j`'s grid.
    pub fn residual(&self, j: usize, rhs: f64, x: &[f64]) -> Interpolant {
        let ps = &self.row_interpolants[j];
        let grid = ps[0].grid().clone();
        let vals = (0..grid.len())
            .map(|l| rhs - ps.iter().zip(x).map(|(p, xi)| xi * p.values()[l]).sum::<f64>())
            .collect();
        Interpolant::new(grid, vals).expect("consistent lengths")
    }
}

/// Interpolates every entry adaptively to `tol`, brings each row to the
/// largest degree among its entries and constrains the residual to the
/// interval cone of that degree.
pub fn build_silp_sdp(sip: &SemiInfiniteProgram, tol: f64) -> Result<SilpSdp, AppError> {
    if !(tol > 0.0) {
        return Err(AppError::InvalidArgument("tol must be positive".into()));
    }
    sip.validate()?;
    let mut prob = BlockSdpProblem::new(Sense::Min);
    let x_block = prob.add_block(BlockKind::Free(sip.n_x));
    prob.set_objective(x_block, Coef::vector(&sip.objective))?;

    let mut row_degrees = Vec::new();
    let mut row_interpolants = Vec::new();
    for (j, (row, &b)) in sip.rows.iter().zip(&sip.rhs).enumerate() {
        let ps = row
            .iter()
            .map(|a| adaptive_interpolate(|t| a(t), tol))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| AppError::Adaptive { row: j, source })?;
        let d = ps.iter().map(|p| p.degree()).max().unwrap_or(0);
        let cone = interval_nonneg_cone(d)?;
        let grid = cone.grid().clone();
        let vals: Vec<Vec<f64>> = ps.iter().map(|p| p.eval_many(grid.points())).collect();
        // b - sum_i x_i a_i(t_l) = cone_l  <=>  sum_i x_i a_i(t_l) + cone_l = b
        let rows: Vec<usize> = (0..grid.len())
            .map(|l| {
                let k = prob.add_constraint(b);
                let coef: Vec<f64> = vals.iter().map(|v| v[l]).collect();
                prob.set_coef(k, x_block, Coef::vector(&coef)).map(|_| k)
            })
            .collect::<Result<_, _>>()?;
        attach_cone(&mut prob, &cone, &rows)?;
        row_degrees.push(d);
        row_interpolants.push(
            vals.into_iter()
                .map(|v| Interpolant::new(grid.clone(), v))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    for (a, b) in &sip.equalities {
        let k = prob.add_constraint(*b);
        prob.set_coef(k, x_block, Coef::vector(a))?;
    }
    for lmi in &sip.lmis {
        add_lmi(&mut prob, x_block, lmi)?;
    }
    Ok(SilpSdp {
        problem: prob,
        x_block,
        row_degrees,
        row_interpolants,
    })
}

/// `S - sum_i x_i f_i = f0` entrywise on the upper triangle, `S ⪰ 0`.
fn add_lmi(prob: &mut BlockSdpProblem, x_block: usize, lmi: &Lmi) -> Result<(), AppError> {
    let k = lmi.f0.nrows();
    let s = prob.add_block(BlockKind::Psd(k));
    for a in 0..k {
        for b in a..k {
            let c = prob.add_constraint(lmi.f0[(a, b)]);
            let e = if a == b { 1.0 } else { 0.5 };
            prob.set_coef(c, s, Coef::Entries(vec![(a, b, e)]))?;
            let coef: Vec<f64> = lmi.fi.iter().map(|f| -f[(a, b)]).collect();
            prob.set_coef(c, x_block, Coef::vector(&coef))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::sampler;
    use crate::sdp::{solve, SolverConfig, Status};

    #[test]
    fn sign_change_forces_zero() {
        // t x <= 0 for all t; push x up as far as allowed
        let mut sip = SemiInfiniteProgram::new(1);
        sip.add_row(vec![sampler(|t| t)], 0.0);
        sip.objective = vec![-1.0];
        let s = build_silp_sdp(&sip, 1e-12).unwrap();
        let sol = solve(&s.problem, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!(sol.x[s.x_block].vector()[0].abs() < 1e-7);
    }

    #[test]
    fn quintic_row_stops_at_first_level() {
        let mut sip = SemiInfiniteProgram::new(1);
        sip.add_row(vec![sampler(|t| t.powi(5) - t)], 1.0);
        let s = build_silp_sdp(&sip, 1e-12).unwrap();
        assert_eq!(s.row_degrees, vec![16]);
    }

    #[test]
    fn lmi_pass_through() {
        // min x s.t. [[x, 1], [1, x]] ⪰ 0 and 0 <= 5 for all t
        let mut sip = SemiInfiniteProgram::new(1);
        sip.add_row(vec![sampler(|_| 0.0)], 5.0);
        sip.objective = vec![1.0];
        sip.lmis.push(Lmi {
            f0: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            fi: vec![DMatrix::identity(2, 2)],
        });
        let s = build_silp_sdp(&sip, 1e-12).unwrap();
        let sol = solve(&s.problem, &SolverConfig::default()).unwrap();
        assert!((sol.x[s.x_block].vector()[0] - 1.0).abs() < 1e-7);
    }
}
