//! Problem builders: semi-infinite LPs, polynomial envelopes, one-sided
//! approximation and optimal experimental design.

mod design;
mod envelope;
mod onesided;
mod oracle;
mod silp;

pub use design::{
    design_weights, eoptimal_support_sdp, fisher_matrix, general_support_sdp, lambda_min, local_design_model,
    logistic_model, solve_design, CriterionBlock, CriterionRep, DesignOptions, DesignResult, FisherModel,
    SupportSdp,
};
pub use envelope::{envelope_dual, envelope_recover, random_envelope_instance, EnvelopeOptions, EnvelopeSdp};
pub use onesided::{onesided_dual, onesided_recover, OnesidedSdp};
pub use oracle::{hermite_l1_oracle, jacobi01_roots, legendre_roots};
pub use silp::{build_silp_sdp, Lmi, SemiInfiniteProgram, SilpSdp};

use std::sync::Arc;

use thiserror::Error;

use crate::chebkit::ChebError;
use crate::sdp::{BlockKind, BlockSdpProblem, Coef, SdpError, Status};
use crate::soscone::{IntervalNonnegCone, SosError};

/// Shareable scalar function on `[-1, 1]`.
pub type Sampler = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wrap a closure as a [`Sampler`].
pub fn sampler(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Sampler {
    Arc::new(f)
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("interpolating row {row}: {source}")]
    Adaptive { row: usize, source: ChebError },
    #[error(transparent)]
    Cheb(#[from] ChebError),
    #[error(transparent)]
    Sos(#[from] SosError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("solver finished with status {status:?}: {detail}")]
    NotSolved { status: Status, detail: String },
    #[error("degenerate result: {0}")]
    Degenerate(String),
}

/// Adds one PSD block per cone member and, for every grid point `l`, the
/// rank-one term of member `j` to constraint `rows[l]`.
pub(crate) fn attach_cone(
    p: &mut BlockSdpProblem,
    cone: &IntervalNonnegCone,
    rows: &[usize],
) -> Result<Vec<usize>, AppError> {
    let mut blocks = Vec::with_capacity(cone.members().len());
    for m in cone.members() {
        let b = p.add_block(BlockKind::Psd(m.size()));
        for (l, &k) in rows.iter().enumerate() {
            p.set_coef(k, b, Coef::rank1(1.0, &m.basis().row(l)))?;
        }
        blocks.push(b);
    }
    Ok(blocks)
}

pub(crate) fn require_usable(sol: &crate::sdp::SdpSolution) -> Result<(), AppError> {
    if sol.is_usable() {
        Ok(())
    } else {
        Err(AppError::NotSolved {
            status: sol.status,
            detail: sol.diagnostic.clone().unwrap_or_default(),
        })
    }
}
