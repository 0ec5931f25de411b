//! Horospherical geometry layer: the operator A[phi], the shifted Weingarten
//! matrix, the embedding into the Minkowski hyperboloid and its inverse
//! (support function from a point cloud), and the Poincare-ball export.
//!
//! Conventions. Minkowski vectors are `[s1, s2, s3, t]` with the time
//! component last and pairing `<X, Y> = s.s - t t`; for n = 1 the third
//! spatial slot stays zero. Hyperbolic space is the upper hyperboloid
//! `<X, X> = -1, t > 0`. A uniformly h-convex hypersurface with support
//! function u = log(phi) on S^n is recovered as
//!
//! ```text
//!   X(x) = phi/2 (-x, 1) + (|D phi|^2/phi + 1/phi)/2 (x, 1) - (D phi, 0),
//! ```
//!
//! which satisfies `<X, X> = -1` and `-<X, (x,1)> = phi(x)` identically --
//! for any tangent vector in the last slot, so both identities hold to
//! rounding even on the discrete gradient. The outward normal is the exact
//! combination `nu = X - (1/phi)(x, 1)`.

use std::sync::Arc;

use crate::error::Error;
use crate::sphere::{FrameDerivatives, ScalarField, SphereGrid};
use crate::symfunc::{self, EigenVector, SymMatrix};
use crate::Result;

/// Minkowski vector, time component last.
pub type MinkVec = [f64; 4];

/// Minkowski pairing `<a, b> = a.s b.s - a.t b.t`.
pub fn mink(a: &MinkVec, b: &MinkVec) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3]
}

/// The null vector (x, 1) of a unit direction x.
pub fn null_vec(x: &[f64; 3]) -> MinkVec {
    [x[0], x[1], x[2], 1.0]
}

/// Horospherical support function: phi = e^u > 1 and u = log(phi).
#[derive(Debug, Clone)]
pub struct SupportFunction {
    phi: ScalarField,
    u: ScalarField,
}

impl SupportFunction {
    /// Builds from phi, which must exceed 1 at every node.
    pub fn from_phi(phi: ScalarField) -> Result<Self> {
        let min = phi.min();
        if !(min > 1.0) {
            return Err(Error::Geometry(format!(
                "support function needs phi > 1 everywhere, min = {min}"
            )));
        }
        let u = phi.map(f64::ln);
        Ok(Self { phi, u })
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.phi.grid()
    }
}

/// Per-node symmetric n x n matrix in the orthonormal frame, stored as
/// `[a11, a12, a22]` (n = 1 uses the first slot only).
#[derive(Debug, Clone)]
pub struct SymTensorField {
    grid: Arc<SphereGrid>,
    data: Vec<[f64; 3]>,
}

impl SymTensorField {
    pub fn new(grid: Arc<SphereGrid>, data: Vec<[f64; 3]>) -> Result<Self> {
        if data.len() != grid.node_count() {
            return Err(Error::GridMismatch("tensor field size".into()));
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn raw(&self) -> &[[f64; 3]] {
        &self.data
    }

    /// The node matrix as a symmetric matrix value.
    pub fn at(&self, idx: usize) -> SymMatrix {
        let d = self.data[idx];
        match self.grid.dim() {
            1 => SymMatrix::from_rows(&[&[d[0]]]).expect("1x1"),
            _ => SymMatrix::from_rows(&[&[d[0], d[1]], &[d[1], d[2]]]).expect("2x2"),
        }
    }

    /// Smallest eigenvalue over all nodes, with the attaining node.
    pub fn min_eigenvalue(&self) -> (usize, f64) {
        let mut node = 0;
        let mut min = f64::INFINITY;
        for idx in 0..self.data.len() {
            let e = self.at(idx).min_eigenvalue();
            if e < min {
                min = e;
                node = idx;
            }
        }
        (node, min)
    }

    /// Largest eigenvalue over all nodes.
    pub fn max_eigenvalue(&self) -> f64 {
        (0..self.data.len())
            .map(|idx| {
                let e = self.at(idx).eigenvalues();
                e.values()[e.n() - 1]
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Points and outward unit normals of the embedded hypersurface in
/// Minkowski space.
#[derive(Debug, Clone)]
pub struct HyperboloidPatch {
    grid: Arc<SphereGrid>,
    points: Vec<MinkVec>,
    normals: Vec<MinkVec>,
}

impl HyperboloidPatch {
    /// Assembles a patch from raw data (sizes must match the grid).
    pub fn new(grid: Arc<SphereGrid>, points: Vec<MinkVec>, normals: Vec<MinkVec>) -> Result<Self> {
        if points.len() != grid.node_count() || normals.len() != grid.node_count() {
            return Err(Error::GridMismatch("patch size".into()));
        }
        Ok(Self {
            grid,
            points,
            normals,
        })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn points(&self) -> &[MinkVec] {
        &self.points
    }

    pub fn normals(&self) -> &[MinkVec] {
        &self.normals
    }
}

/// Shifted principal curvatures, their k-th symmetric function and the
/// hyperbolic curvature radii, per node.
#[derive(Debug, Clone)]
pub struct ShiftedCurvatures {
    pub k: usize,
    /// kappa_i - 1, ascending; n = 1 uses the first slot only.
    pub kappa_tilde: Vec<[f64; 2]>,
    /// H_tilde_k = sigma_k(kappa_tilde).
    pub h_tilde_k: ScalarField,
    /// Hyperbolic curvature radii 1 / kappa_tilde_i.
    pub radii: Vec<[f64; 2]>,
}

impl ShiftedCurvatures {
    /// Builds from per-node shifted curvature values; all must be positive.
    pub(crate) fn from_values(
        grid: &Arc<SphereGrid>,
        kappa_tilde: Vec<[f64; 2]>,
        k: usize,
    ) -> Result<Self> {
        let n = grid.dim();
        let mut h = Vec::with_capacity(kappa_tilde.len());
        let mut radii = Vec::with_capacity(kappa_tilde.len());
        for (idx, kt) in kappa_tilde.iter().enumerate() {
            let vals = &kt[..n];
            if let Some(&bad) = vals.iter().find(|v| **v <= 0.0) {
                return Err(Error::HConvexity {
                    node: idx,
                    value: bad,
                });
            }
            let ev = EigenVector::new(vals)?;
            h.push(symfunc::sigma(&ev, k)?);
            radii.push([1.0 / kt[0], if n == 2 { 1.0 / kt[1] } else { 0.0 }]);
        }
        Ok(Self {
            k,
            kappa_tilde,
            h_tilde_k: ScalarField::new(grid.clone(), h)?,
            radii,
        })
    }

    /// Smallest shifted curvature over all nodes.
    pub fn min_kappa_tilde(&self) -> f64 {
        let n = self.h_tilde_k.grid().dim();
        self.kappa_tilde
            .iter()
            .flat_map(|kt| kt[..n].iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// The operator `A[phi] = D^2 phi - |D phi|^2/(2 phi) I + (phi - 1/phi)/2 I`
/// in the orthonormal frame. Total on any valid support function; positivity
/// is the callers' responsibility to check.
pub fn build_a(sf: &SupportFunction) -> SymTensorField {
    let d = sf.phi().derivatives();
    build_a_with(sf, &d)
}

/// A[phi] reusing precomputed derivatives.
pub fn build_a_with(sf: &SupportFunction, d: &FrameDerivatives) -> SymTensorField {
    let grid = sf.grid().clone();
    let n = grid.dim();
    let phi = sf.phi().values();
    let mut data = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let p = phi[idx];
        let shift = -0.5 * d.grad_sq(idx) / p + 0.5 * (p - 1.0 / p);
        let h = d.hess[idx];
        data.push(match n {
            1 => [h[0] + shift, 0.0, 0.0],
            _ => [h[0] + shift, h[1], h[2] + shift],
        });
    }
    SymTensorField { grid, data }
}

/// Shifted Weingarten matrix `W = (phi A)^{-1}` per node; errors on the
/// first node where A fails to be positive definite.
pub fn shifted_weingarten(sf: &SupportFunction, a: &SymTensorField) -> Result<SymTensorField> {
    let grid = sf.grid().clone();
    let n = grid.dim();
    let phi = sf.phi().values();
    let mut data = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let m = a.data[idx];
        let p = phi[idx];
        match n {
            1 => {
                if m[0] <= 0.0 {
                    return Err(Error::ConeViolation {
                        node: idx,
                        min_eig: m[0],
                    });
                }
                data.push([1.0 / (p * m[0]), 0.0, 0.0]);
            }
            _ => {
                let det = m[0] * m[2] - m[1] * m[1];
                if !(m[0] > 0.0 && det > 0.0) {
                    return Err(Error::ConeViolation {
                        node: idx,
                        min_eig: a.at(idx).min_eigenvalue(),
                    });
                }
                let s = 1.0 / (p * det);
                data.push([s * m[2], -s * m[1], s * m[0]]);
            }
        }
    }
    Ok(SymTensorField { grid, data })
}

/// Eigenvalues of the shifted Weingarten field: the shifted principal
/// curvatures, their sigma_k and the curvature radii.
pub fn shifted_curvatures(w: &SymTensorField, k: usize) -> Result<ShiftedCurvatures> {
    let grid = w.grid().clone();
    let n = grid.dim();
    let mut kappa = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let ev = w.at(idx).eigenvalues();
        let v = ev.values();
        kappa.push([v[0], if n == 2 { v[1] } else { 0.0 }]);
    }
    ShiftedCurvatures::from_values(&grid, kappa, k)
}

/// Embeds the support function as a hypersurface patch on the hyperboloid,
/// with outward normals from the exact identity `nu = X - (1/phi)(x, 1)`.
pub fn embed(sf: &SupportFunction) -> HyperboloidPatch {
    let d = sf.phi().derivatives();
    embed_with(sf, &d)
}

/// Embedding reusing precomputed derivatives.
pub fn embed_with(sf: &SupportFunction, d: &FrameDerivatives) -> HyperboloidPatch {
    let grid = sf.grid().clone();
    let phi = sf.phi().values();
    let mut points = Vec::with_capacity(grid.node_count());
    let mut normals = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let x = grid.node(idx);
        let p = phi[idx];
        let (e_t, e_p) = grid.frame(idx);
        let g = d.grad[idx];
        // Ambient components of the tangential gradient.
        let dphi = [
            g[0] * e_t[0] + g[1] * e_p[0],
            g[0] * e_t[1] + g[1] * e_p[1],
            g[0] * e_t[2] + g[1] * e_p[2],
        ];
        let a = 0.5 * p;
        let b = 0.5 * (d.grad_sq(idx) / p + 1.0 / p);
        let point = [
            -a * x[0] + b * x[0] - dphi[0],
            -a * x[1] + b * x[1] - dphi[1],
            -a * x[2] + b * x[2] - dphi[2],
            a + b,
        ];
        let inv = 1.0 / p;
        let normal = [
            point[0] - inv * x[0],
            point[1] - inv * x[1],
            point[2] - inv * x[2],
            point[3] - inv,
        ];
        points.push(point);
        normals.push(normal);
    }
    HyperboloidPatch {
        grid,
        points,
        normals,
    }
}

/// Support function of a discrete patch: for each direction x, the maximum
/// of `log(-<X, (x,1)>)` over the patch points. A lower bound of the true
/// support that converges as the patch refines.
pub fn support_from_patch(patch: &HyperboloidPatch, directions: &Arc<SphereGrid>) -> Result<ScalarField> {
    if patch.points.is_empty() {
        return Err(Error::Argument("empty patch".into()));
    }
    let mut values = Vec::with_capacity(directions.node_count());
    for x in directions.nodes() {
        let nx = null_vec(x);
        let best = patch
            .points
            .iter()
            .map(|p| -mink(p, &nx))
            .fold(f64::NEG_INFINITY, f64::max);
        if best <= 0.0 {
            return Err(Error::Geometry(format!(
                "non-positive horospherical pairing {best} in direction ({}, {}, {})",
                x[0], x[1], x[2]
            )));
        }
        values.push(best.ln());
    }
    ScalarField::new(directions.clone(), values)
}

/// Poincare-ball points `p = X_spatial / (1 + X^0)` of a patch.
pub fn to_poincare(patch: &HyperboloidPatch) -> Vec<[f64; 3]> {
    patch
        .points
        .iter()
        .map(|p| {
            let s = 1.0 / (1.0 + p[3]);
            [p[0] * s, p[1] * s, p[2] * s]
        })
        .collect()
}
