//! Observational-interventional Bell scenarios.
//!
//! Hybrid behaviors of the instrumental scenario and their classical polytope, quantum models
//! with seesaw optimization and detection-efficiency analysis, maps to the Bell scenario and
//! exogenized causal graphs, and the classical-compatibility SDPs for extended assemblages.

pub mod behavior;
pub mod io;
pub mod mappings;
pub mod polytope;
pub mod quantum;
pub mod sampling;
pub mod steering;

pub use behavior::{from_correlators, from_strategy, Correlators, DeterministicStrategy, ExtendedBehavior, Scenario, Violation};
pub use hybrid_bell_solver as solver;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use hybrid_bell_solver::{Rational, Scalar};

/// Floating-point behavior used by the quantum and sampling code.
pub type Behavior = ExtendedBehavior<f64>;
/// Exact behavior used for vertex computations.
pub type ExactBehavior = ExtendedBehavior<Rational>;

#[derive(Debug, thiserror::Error)]
pub enum HybridError {
    /// Malformed input: wrong shapes, unknown indices.
    #[error("structural error: {0}")]
    Structural(String),
    /// Well-formed input outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Invalid quantum state, measurement or channel.
    #[error("model error: {0}")]
    Model(String),
    #[error("solver error: {0}")]
    Solver(#[from] hybrid_bell_solver::SolverError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for HybridError {
    fn from(e: serde_json::Error) -> Self {
        HybridError::Parse(e.to_string())
    }
}

impl From<csv::Error> for HybridError {
    fn from(e: csv::Error) -> Self {
        HybridError::Parse(e.to_string())
    }
}
