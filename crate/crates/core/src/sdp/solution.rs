use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::problem::{BlockKind, BlockSdpProblem, Coef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    SlowProgress,
    IterLimit,
}

/// Value of one variable block.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockValue {
    Matrix(DMatrix<f64>),
    Vector(DVector<f64>),
}

impl BlockValue {
    pub fn matrix(&self) -> &DMatrix<f64> {
        match self {
            BlockValue::Matrix(m) => m,
            BlockValue::Vector(_) => panic!("vector block accessed as a matrix"),
        }
    }

    pub fn vector(&self) -> &DVector<f64> {
        match self {
            BlockValue::Vector(v) => v,
            BlockValue::Matrix(_) => panic!("matrix block accessed as a vector"),
        }
    }

    pub(crate) fn zeros(kind: BlockKind) -> Self {
        match kind {
            BlockKind::Psd(n) => BlockValue::Matrix(DMatrix::zeros(n, n)),
            BlockKind::Nonneg(n) | BlockKind::Free(n) => BlockValue::Vector(DVector::zeros(n)),
        }
    }

    fn norm_sq(&self) -> f64 {
        match self {
            BlockValue::Matrix(m) => m.norm_squared(),
            BlockValue::Vector(v) => v.norm_squared(),
        }
    }

}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub pinf: f64,
    pub dinf: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: Status,
    /// Primal blocks.
    pub x: Vec<BlockValue>,
    /// Dual multipliers of the equality constraints.
    pub y: Vec<f64>,
    /// Dual slack blocks (zero on free blocks).
    pub z: Vec<BlockValue>,
    pub iterations: usize,
    pub residuals: Residuals,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Set when the solver stopped for a numerical reason.
    pub diagnostic: Option<String>,
}

/// Machine-readable summary of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub status: Status,
    pub iterations: usize,
    pub pinf: f64,
    pub dinf: f64,
    pub gap: f64,
    pub objective: f64,
}

impl SdpSolution {
    pub fn record(&self) -> SolveRecord {
        SolveRecord {
            status: self.status,
            iterations: self.iterations,
            pinf: self.residuals.pinf,
            dinf: self.residuals.dinf,
            gap: self.residuals.gap,
            objective: self.primal_objective,
        }
    }

    pub fn is_usable(&self) -> bool {
        matches!(self.status, Status::Optimal | Status::SlowProgress)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
    /// Keep iterating past the tolerances while progress is made.
    pub allow_stall_exit: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_gap: 1e-9,
            tol_feas: 1e-9,
            max_iter: 200,
            step_fraction: 0.98,
            allow_stall_exit: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol_gap > 0.0 && self.tol_feas > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err("step fraction must lie in (0, 1)".into());
        }
        if self.max_iter == 0 {
            return Err("max_iter must be positive".into());
        }
        Ok(())
    }
}

pub(crate) fn coef_dot(c: &Coef, x: &BlockValue) -> f64 {
    match x {
        BlockValue::Matrix(m) => match c {
            Coef::Entries(es) => es
                .iter()
                .map(|&(i, j, v)| if i == j { v * m[(i, i)] } else { 2.0 * v * m[(i, j)] })
                .sum(),
            Coef::Dense(a) => a.dot(m),
            Coef::Rank1 { scale, v } => scale * (m * v).dot(v),
        },
        BlockValue::Vector(d) => match c {
            Coef::Entries(es) => es.iter().filter(|e| e.0 == e.1).map(|&(i, _, v)| v * d[i]).sum(),
            Coef::Dense(a) => a.diagonal().dot(d),
            Coef::Rank1 { scale, v } => scale * v.iter().zip(d.iter()).map(|(a, b)| a * a * b).sum::<f64>(),
        },
    }
}

fn add_coef(acc: &mut BlockValue, c: &Coef, s: f64) {
    match acc {
        BlockValue::Matrix(m) => {
            let n = m.nrows();
            match c {
                Coef::Entries(es) => {
                    for &(i, j, v) in es {
                        m[(i, j)] += s * v;
                        if i != j {
                            m[(j, i)] += s * v;
                        }
                    }
                }
                Coef::Dense(a) => *m += a * s,
                Coef::Rank1 { scale, v } => {
                    m.ger(s * scale, v, v, 1.0);
                    debug_assert_eq!(n, v.len());
                }
            }
        }
        BlockValue::Vector(d) => *d += c.to_diag(d.len()) * s,
    }
}

/// `A(X)` as a vector over the constraints.
pub fn apply_constraints(p: &BlockSdpProblem, x: &[BlockValue]) -> Vec<f64> {
    p.constraints()
        .iter()
        .map(|c| c.terms.iter().map(|(b, coef)| coef_dot(coef, &x[*b])).sum())
        .collect()
}

/// `sum_k y_k A_k` per block.
pub fn apply_adjoint(p: &BlockSdpProblem, y: &[f64]) -> Vec<BlockValue> {
    let mut out: Vec<BlockValue> = p.blocks().iter().map(|k| BlockValue::zeros(*k)).collect();
    for (c, &yk) in p.constraints().iter().zip(y) {
        if yk == 0.0 {
            continue;
        }
        for (b, coef) in &c.terms {
            add_coef(&mut out[*b], coef, yk);
        }
    }
    out
}

/// Objective coefficient per block.
pub fn objective_blocks(p: &BlockSdpProblem) -> Vec<BlockValue> {
    let mut out: Vec<BlockValue> = p.blocks().iter().map(|k| BlockValue::zeros(*k)).collect();
    for (b, coef) in p.objective() {
        add_coef(&mut out[*b], coef, 1.0);
    }
    out
}

pub fn primal_objective(p: &BlockSdpProblem, x: &[BlockValue]) -> f64 {
    p.objective().iter().map(|(b, c)| coef_dot(c, &x[*b])).sum()
}

/// Relative primal infeasibility, dual infeasibility and duality gap.
///
/// For a maximization problem the dual reads `A^T y - C = Z`.
pub fn residuals(p: &BlockSdpProblem, x: &[BlockValue], y: &[f64], z: &[BlockValue]) -> Residuals {
    let b = p.rhs();
    let ax = apply_constraints(p, x);
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rp = ax.iter().zip(&b).map(|(a, bb)| (a - bb).powi(2)).sum::<f64>().sqrt();
    let c = objective_blocks(p);
    let aty = apply_adjoint(p, y);
    let sign = p.sense().sign();
    let mut rd = 0.0;
    let mut cnorm = 0.0;
    for (((cb, ab), zb), kind) in c.iter().zip(&aty).zip(z).zip(p.blocks()) {
        cnorm += cb.norm_sq();
        rd += match (cb, ab, zb) {
            (BlockValue::Matrix(cm), BlockValue::Matrix(am), BlockValue::Matrix(zm)) => {
                ((cm - am) * sign - zm).norm_squared()
            }
            (BlockValue::Vector(cv), BlockValue::Vector(av), BlockValue::Vector(zv)) => {
                if matches!(kind, BlockKind::Free(_)) {
                    (cv - av).norm_squared()
                } else {
                    ((cv - av) * sign - zv).norm_squared()
                }
            }
            _ => f64::INFINITY,
        };
    }
    let pobj = primal_objective(p, x);
    let dobj: f64 = b.iter().zip(y).map(|(a, bb)| a * bb).sum();
    Residuals {
        pinf: rp / (1.0 + bnorm),
        dinf: rd.sqrt() / (1.0 + cnorm.sqrt()),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
    }
}
