//! Sum-of-squares interpolants on Chebyshev grids and the semidefinite
//! programs built from them.

pub mod apps;
pub mod chebkit;
pub mod sdp;
pub mod soscone;
