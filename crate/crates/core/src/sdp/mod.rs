//! Standard-form block semidefinite programs, an interior-point solver and
//! SDPA sparse-format interchange.

mod problem;
mod sdpa;
mod solution;
mod solver;

pub use problem::{BlockKind, BlockSdpProblem, Coef, Constraint, Sense};
pub use sdpa::{export_sdpa, import_sdpa};
pub use solution::{
    apply_adjoint, apply_constraints, objective_blocks, primal_objective, residuals, BlockValue,
    Residuals, SdpSolution, SolveRecord, SolverConfig, Status,
};
pub use solver::solve;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Residuals of a solution recomputed from its blocks.
pub fn solution_residuals(p: &BlockSdpProblem, sol: &SdpSolution) -> Residuals {
    residuals(p, &sol.x, &sol.y, &sol.z)
}
