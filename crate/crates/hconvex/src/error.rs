//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by grid construction, symmetric-function calculus, the
/// geometry layer and the solver.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid argument (index out of range, bad grid size, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A matrix left the admissible cone (not positive definite).
    #[error("cone violation at node {node}: smallest eigenvalue {min_eig:.6e}")]
    ConeViolation { node: usize, min_eig: f64 },

    /// A shifted principal curvature is non-positive (h-convexity lost).
    #[error("h-convexity violation at node {node}: shifted curvature {value:.6e}")]
    HConvexity { node: usize, value: f64 },

    /// Degenerate or inconsistent geometry (singular metric, bad pairing).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Two fields live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Newton iteration did not reach the tolerance within the iteration cap.
    #[error("Newton did not converge: residual {residual:.6e} after {iters} iterations")]
    NonConvergence { residual: f64, iters: usize },

    /// Line search step fell below the floor without residual decrease.
    #[error("line search stalled at step {step:.3e} (residual {residual:.6e})")]
    LineSearchStall { step: f64, residual: f64 },

    /// Homotopy step size underflowed before reaching t = 1.
    #[error("continuation failed at t = {t_last:.6}: increment underflow")]
    ContinuationFailure { t_last: f64 },

    /// The linear solve failed (singular pivot).
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
}
