//! Numerical solver and verification suite for the prescribed shifted mean
//! curvature problem for uniformly h-convex hypersurfaces in hyperbolic space.
//!
//! A closed uniformly h-convex hypersurface in H^{n+1} is described by its
//! horospherical support function u on the sphere S^n (equivalently phi = e^u).
//! Prescribing the k-th shifted mean curvature as a positive even function
//! f_tilde on S^n reduces to the Hessian quotient equation
//!
//! ```text
//!     sigma_n(A[phi]) / sigma_{n-k}(A[phi]) = phi^{-k} f,      f = 1 / f_tilde,
//! ```
//!
//! where `A[phi] = D^2 phi - |D phi|^2/(2 phi) I + (phi - 1/phi)/2 I` must stay
//! positive definite (uniform h-convexity). The crate provides:
//!
//! - [`symfunc`]: elementary symmetric function calculus on eigenvalues and
//!   small symmetric matrices (Garding cones, Newton-MacLaurin inequalities,
//!   quotient derivatives),
//! - [`sphere`]: pole-free structured grids on S^1 and S^2 with antipodal
//!   symmetry, quadrature and covariant derivatives in the orthonormal frame,
//! - [`horo`]: the horospherical geometry layer (A[phi], shifted Weingarten
//!   matrix, embedding into the Minkowski hyperboloid, Poincare ball export),
//! - [`solver`]: cone-safeguarded damped Newton iteration and homotopy
//!   continuation for the quotient equation, plus analytic a priori bounds,
//! - [`verify`]: an independent oracle that re-measures curvatures of the
//!   embedded hypersurface by discrete differential geometry and compares
//!   them against the prescription.

pub mod error;
pub mod horo;
pub mod solver;
pub mod sphere;
pub mod symfunc;
pub mod verify;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
