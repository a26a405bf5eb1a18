//! Numerical engines: a generic simplex LP, exact double description, closed-form 2x2
//! Hermitian kernels and a block SDP solver.

pub mod dd;
pub mod herm2;
pub mod linalg;
pub mod lp;
pub mod scalar;
pub mod sdp;

pub use dd::{affine_rank, double_description, AffineHull, Facet, HullOutcome};
pub use herm2::{max_psd_step, psd_project_2x2, Eigen2, Herm2, Mat2};
pub use lp::{lp_solve, FarkasCertificate, LpOutcome, LpProblem, LpSolution, VarBounds};
pub use scalar::Scalar;
pub use sdp::{
    hermitian_basis, hermitian_from_duals, sdp_solve, SdpConstraint, SdpMethod, SdpModel, SdpOptions,
    SdpResiduals, SdpSolution, SdpStatus,
};

/// Exact rational scalar used for vertex computations.
pub type Rational = num::BigRational;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("simplex exceeded {0} pivots (cycling guard)")]
    CyclingGuard(usize),
}
