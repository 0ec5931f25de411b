//! Structured, pole-free discretization of S^1 and S^2 with exact antipodal
//! symmetry, quadrature, and covariant differential operators (gradient,
//! Hessian, Laplacian) in the orthonormal frame.
//!
//! For n = 2 the nodes sit at cell-centered colatitudes
//! `theta_i = (i + 1/2) pi / n_theta` and uniform longitudes
//! `phi_j = 2 pi j / n_phi`, so no node ever lies on a coordinate pole and
//! the antipodal map is the exact index permutation
//! `(i, j) -> (n_theta - 1 - i, (j + n_phi/2) mod n_phi)`. For n = 1 the grid
//! is `n_phi` uniform nodes on the circle. Trigonometric tables are mirrored
//! across the equator so antipodal node pairs agree bitwise.
//!
//! Quadrature weights are exact cell areas `(cos theta_i^- - cos theta_i^+)
//! d_phi`, which are positive, sum to the sphere area up to rounding, and
//! integrate smooth fields to second order.

mod stencil;

pub(crate) use stencil::{apply, row_entries};

use std::sync::Arc;

use crate::error::Error;
use crate::Result;

/// Pole-free grid on S^n (n = 1 or 2) with antipodal pairing and quadrature.
#[derive(Debug)]
pub struct SphereGrid {
    n: usize,
    n_theta: usize,
    n_phi: usize,
    d_theta: f64,
    d_phi: f64,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
    // Trig tables; for n = 2 indexed by row, mirrored so that
    // sin[N-1-i] == sin[i] and cos[N-1-i] == -cos[i] bitwise.
    sin_theta: Vec<f64>,
    cos_theta: Vec<f64>,
}

/// Builds mirrored (sin, cos) tables for angles a(idx), count m, such that
/// entry m-1-idx (resp. idx + m/2) carries the exact negations expected from
/// the symmetry `mirror(a) = pi - a` (resp. `a + pi`).
fn mirrored_trig(count: usize, angle: impl Fn(usize) -> f64, half_turn: bool) -> (Vec<f64>, Vec<f64>) {
    let mut s = vec![0.0; count];
    let mut c = vec![0.0; count];
    let half = count / 2;
    for idx in 0..half + count % 2 {
        let a = angle(idx);
        s[idx] = a.sin();
        c[idx] = a.cos();
        let m = if half_turn { idx + half } else { count - 1 - idx };
        if m == idx {
            // Self-mirrored entry: the angle is exactly pi/2.
            s[idx] = 1.0;
            c[idx] = 0.0;
        } else if m < count {
            if half_turn {
                s[m] = -s[idx];
                c[m] = -c[idx];
            } else {
                s[m] = s[idx];
                c[m] = -c[idx];
            }
        }
    }
    (s, c)
}

impl SphereGrid {
    /// Builds a grid on S^n. `n_phi` must be even (so the antipodal map is an
    /// exact grid symmetry) and at least 8; for n = 2, `n_theta >= 4`.
    /// For n = 1 the `n_theta` argument is ignored.
    pub fn build(n: usize, n_theta: usize, n_phi: usize) -> Result<Arc<SphereGrid>> {
        if n != 1 && n != 2 {
            return Err(Error::Argument(format!("sphere dimension must be 1 or 2, got {n}")));
        }
        if n_phi % 2 != 0 {
            return Err(Error::Argument(format!(
                "n_phi must be even to keep antipodal closure, got {n_phi}"
            )));
        }
        if n_phi < 8 {
            return Err(Error::Argument(format!("n_phi must be >= 8, got {n_phi}")));
        }
        if n == 2 && n_theta < 4 {
            return Err(Error::Argument(format!("n_theta must be >= 4, got {n_theta}")));
        }

        let grid = match n {
            1 => {
                let d_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
                let (s, c) = mirrored_trig(n_phi, |j| j as f64 * d_phi, true);
                let nodes: Vec<[f64; 3]> = (0..n_phi).map(|j| [c[j], s[j], 0.0]).collect();
                let antipode = (0..n_phi).map(|j| (j + n_phi / 2) % n_phi).collect();
                SphereGrid {
                    n,
                    n_theta: 1,
                    n_phi,
                    d_theta: d_phi,
                    d_phi,
                    nodes,
                    weights: vec![d_phi; n_phi],
                    antipode,
                    sin_theta: s,
                    cos_theta: c,
                }
            }
            _ => {
                let d_theta = std::f64::consts::PI / n_theta as f64;
                let d_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
                let (sin_t, cos_t) =
                    mirrored_trig(n_theta, |i| (i as f64 + 0.5) * d_theta, false);
                let (sin_p, cos_p) = mirrored_trig(n_phi, |j| j as f64 * d_phi, true);
                // Cell-edge cosines, mirrored so cell areas pair exactly.
                let (_, edge_cos) = mirrored_trig(n_theta + 1, |i| i as f64 * d_theta, false);

                let count = n_theta * n_phi;
                let mut nodes = Vec::with_capacity(count);
                let mut weights = Vec::with_capacity(count);
                let mut antipode = Vec::with_capacity(count);
                for i in 0..n_theta {
                    let w = (edge_cos[i] - edge_cos[i + 1]) * d_phi;
                    for j in 0..n_phi {
                        nodes.push([sin_t[i] * cos_p[j], sin_t[i] * sin_p[j], cos_t[i]]);
                        weights.push(w);
                        antipode.push((n_theta - 1 - i) * n_phi + (j + n_phi / 2) % n_phi);
                    }
                }
                SphereGrid {
                    n,
                    n_theta,
                    n_phi,
                    d_theta,
                    d_phi,
                    nodes,
                    weights,
                    antipode,
                    sin_theta: sin_t,
                    cos_theta: cos_t,
                }
            }
        };
        Ok(Arc::new(grid))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Unit node vectors in R^{n+1} (third component zero for n = 1).
    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> [f64; 3] {
        self.nodes[idx]
    }

    /// Quadrature weights (surface measure).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the antipodal node.
    pub fn antipode(&self, idx: usize) -> usize {
        self.antipode[idx]
    }

    /// Grid angles of a node: (theta, phi) for n = 2, (angle, 0) for n = 1.
    pub fn angles(&self, idx: usize) -> (f64, f64) {
        if self.n == 1 {
            (idx as f64 * self.d_phi, 0.0)
        } else {
            let (i, j) = (idx / self.n_phi, idx % self.n_phi);
            ((i as f64 + 0.5) * self.d_theta, j as f64 * self.d_phi)
        }
    }

    /// Flat node index of grid coordinates.
    pub fn index(&self, i: usize, j: usize) -> usize {
        if self.n == 1 {
            j
        } else {
            i * self.n_phi + j
        }
    }

    /// Surface area of S^n.
    pub fn area(&self) -> f64 {
        let pi = std::f64::consts::PI;
        if self.n == 1 {
            2.0 * pi
        } else {
            4.0 * pi
        }
    }

    /// Largest grid spacing, the `h` entering discretization-slack bounds.
    pub fn spacing(&self) -> f64 {
        self.d_theta.max(self.d_phi)
    }

    /// Orthonormal tangent frame at a node: (e_theta, e_phi) for n = 2,
    /// (counterclockwise tangent, zero) for n = 1, in ambient coordinates.
    pub fn frame(&self, idx: usize) -> ([f64; 3], [f64; 3]) {
        if self.n == 1 {
            let p = self.nodes[idx];
            ([-p[1], p[0], 0.0], [0.0, 0.0, 0.0])
        } else {
            let i = idx / self.n_phi;
            let (st, ct) = (self.sin_theta[i], self.cos_theta[i]);
            let p = self.nodes[idx];
            // cos(phi_j), sin(phi_j) recovered from the node coordinates to
            // keep the frame exactly antipode-symmetric.
            let (cp, sp) = (p[0] / st, p[1] / st);
            ([ct * cp, ct * sp, -st], [-sp, cp, 0.0])
        }
    }

    /// Structural grid identity (same discretization parameters).
    pub fn same_layout(&self, other: &SphereGrid) -> bool {
        self.n == other.n && self.n_theta == other.n_theta && self.n_phi == other.n_phi
    }
}

/// Real values sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("field has non-finite value".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<SphereGrid>, c: f64) -> Self {
        let n = grid.node_count();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    /// Samples a function of the ambient unit vector.
    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let values = grid.nodes().iter().map(f).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Covariant gradient and Hessian in the orthonormal frame, by centered
    /// finite differences (fourth-order stencils inside the polar band).
    pub fn derivatives(&self) -> FrameDerivatives {
        let grid = &self.grid;
        let count = grid.node_count();
        let mut grad = vec![[0.0; 2]; count];
        let mut hess = vec![[0.0; 3]; count];
        for idx in 0..count {
            let op = grid.node_operator(idx);
            grad[idx] = [
                apply(&op.grad[0], op.base, &self.values),
                apply(&op.grad[1], op.base, &self.values),
            ];
            hess[idx] = [
                apply(&op.hess[0], op.base, &self.values),
                apply(&op.hess[1], op.base, &self.values),
                apply(&op.hess[2], op.base, &self.values),
            ];
        }
        FrameDerivatives { grad, hess }
    }

    /// Laplace-Beltrami operator (trace of the covariant Hessian).
    pub fn laplacian(&self) -> ScalarField {
        let d = self.derivatives();
        let values = d
            .hess
            .iter()
            .map(|h| if self.grid.dim() == 1 { h[0] } else { h[0] + h[2] })
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Projection onto even functions: the average with the antipodal value.
    pub fn even_project(&self) -> ScalarField {
        let values = (0..self.len())
            .map(|i| 0.5 * (self.values[i] + self.values[self.grid.antipode(i)]))
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Maximum antipodal asymmetry `max |f(x) - f(-x)|`.
    pub fn evenness_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.values[i] - self.values[self.grid.antipode(i)]).abs())
            .fold(0.0, f64::max)
    }

    /// Quadrature: sum of values times weights.
    pub fn integrate(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v * w)
            .sum()
    }
}

/// Per-node frame components of the covariant gradient and Hessian.
/// For n = 1 only `grad[0]` and `hess[0]` are meaningful; for n = 2 the
/// Hessian is stored as `[H_tt, H_tp, H_pp]`.
#[derive(Debug, Clone)]
pub struct FrameDerivatives {
    pub grad: Vec<[f64; 2]>,
    pub hess: Vec<[f64; 3]>,
}

impl FrameDerivatives {
    /// Squared gradient norm at a node.
    pub fn grad_sq(&self, idx: usize) -> f64 {
        let g = self.grad[idx];
        g[0] * g[0] + g[1] * g[1]
    }
}
