//! Finite-difference stencils on the structured sphere grid.
//!
//! Interior nodes use second-order centered differences. Rows inside a fixed
//! polar band (colatitude below roughly pi/4, top and bottom quarter of the
//! rows) use fourth-order centered stencils instead: the orthonormal-frame
//! Hessian divides phi-derivatives by sin(theta), which would amplify a
//! second-order truncation error to O(h) on the rows next to the poles and
//! destroy the uniform second-order accuracy of the scheme. The band keeps
//! the global L-infinity error at O(h^2) while the interior stencils remain
//! plain second order.
//!
//! Stencils that reach past a pole are closed with the ghost identity
//! `value(-theta, phi) = value(theta, phi + pi)`, which is exact for any
//! single-valued function on the sphere.

use super::SphereGrid;

const D1_O2: [(isize, f64); 2] = [(-1, -0.5), (1, 0.5)];
const D2_O2: [(isize, f64); 3] = [(-1, 1.0), (0, -2.0), (1, 1.0)];
const D1_O4: [(isize, f64); 4] = [
    (-2, 1.0 / 12.0),
    (-1, -2.0 / 3.0),
    (1, 2.0 / 3.0),
    (2, -1.0 / 12.0),
];
const D2_O4: [(isize, f64); 5] = [
    (-2, -1.0 / 12.0),
    (-1, 4.0 / 3.0),
    (0, -5.0 / 2.0),
    (1, 4.0 / 3.0),
    (2, -1.0 / 12.0),
];

/// Sparse row: (node index, coefficient) pairs, sorted by index.
pub type Stencil = Vec<(usize, f64)>;

/// Per-node discrete operators for the covariant derivatives in the
/// orthonormal frame. For n = 1 only `grad[0]` and `hess[0]` are used;
/// for n = 2 the entries are (e_theta, e_phi) and (H_tt, H_tp, H_pp).
///
/// Stencils act in difference form `sum_q c_q (v_q - v_base)`, which makes
/// them exactly zero on constant fields; `row_entries` exposes the matching
/// matrix row for Jacobian assembly.
pub struct NodeOperator {
    pub base: usize,
    pub grad: [Stencil; 2],
    pub hess: [Stencil; 3],
}

/// Matrix-row view of a difference-form stencil: the plain coefficients plus
/// a compensating entry `-sum c_q` on the base node.
pub fn row_entries(stencil: &[(usize, f64)], base: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
    let total: f64 = stencil.iter().map(|&(_, c)| c).sum();
    stencil
        .iter()
        .copied()
        .chain(std::iter::once((base, -total)))
}

/// Raw grid-coordinate derivatives (no frame factors): first derivatives
/// `[d_theta, d_phi]` and second derivatives `[d_tt, d_tp, d_pp]`. For n = 1
/// only the theta slots are used.
pub struct CoordOperator {
    pub base: usize,
    pub d1: [Stencil; 2],
    pub d2: [Stencil; 3],
}

fn push_scaled(acc: &mut Vec<(usize, f64)>, s: &[(usize, f64)], factor: f64) {
    if factor == 0.0 {
        return;
    }
    acc.extend(s.iter().map(|&(q, c)| (q, c * factor)));
}

fn merged(mut acc: Vec<(usize, f64)>) -> Stencil {
    acc.sort_by_key(|&(q, _)| q);
    let mut out: Stencil = Vec::with_capacity(acc.len());
    for (q, c) in acc {
        match out.last_mut() {
            Some((lq, lc)) if *lq == q => *lc += c,
            _ => out.push((q, c)),
        }
    }
    out
}

impl SphereGrid {
    /// Maps possibly out-of-range grid coordinates to a node index: phi wraps
    /// periodically, theta reflects across the poles with a half-turn in phi.
    pub(crate) fn resolve(&self, i: isize, j: isize) -> usize {
        let m = self.n_phi as isize;
        if self.n == 1 {
            return j.rem_euclid(m) as usize;
        }
        let nt = self.n_theta as isize;
        let (i, j) = if i < 0 {
            (-1 - i, j + m / 2)
        } else if i >= nt {
            (2 * nt - 1 - i, j + m / 2)
        } else {
            (i, j)
        };
        debug_assert!((0..nt).contains(&i), "double pole reflection");
        i as usize * self.n_phi + j.rem_euclid(m) as usize
    }

    /// Whether row i lies in the fourth-order polar band.
    pub(crate) fn polar_band(&self, i: usize) -> bool {
        let band = self.n_theta / 4;
        self.n == 2 && (i < band || i >= self.n_theta - band)
    }

    fn theta_stencil(&self, i: usize, j: usize, table: &[(isize, f64)], scale: f64) -> Vec<(usize, f64)> {
        table
            .iter()
            .map(|&(di, c)| (self.resolve(i as isize + di, j as isize), c * scale))
            .collect()
    }

    fn phi_stencil(&self, i: usize, j: usize, table: &[(isize, f64)], scale: f64) -> Vec<(usize, f64)> {
        table
            .iter()
            .map(|&(dj, c)| (self.resolve(i as isize, j as isize + dj), c * scale))
            .collect()
    }

    fn mixed_stencil(
        &self,
        i: usize,
        j: usize,
        t_table: &[(isize, f64)],
        p_table: &[(isize, f64)],
        scale: f64,
    ) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(t_table.len() * p_table.len());
        for &(di, ct) in t_table {
            for &(dj, cp) in p_table {
                out.push((
                    self.resolve(i as isize + di, j as isize + dj),
                    ct * cp * scale,
                ));
            }
        }
        out
    }

    /// Builds the frame-derivative stencils for one node.
    pub(crate) fn node_operator(&self, idx: usize) -> NodeOperator {
        if self.n == 1 {
            let h = self.d_phi;
            let j = idx;
            let g = merged(self.phi_stencil(0, j, &D1_O2, 1.0 / h));
            let hss = merged(self.phi_stencil(0, j, &D2_O2, 1.0 / (h * h)));
            return NodeOperator {
                base: idx,
                grad: [g, Vec::new()],
                hess: [hss, Vec::new(), Vec::new()],
            };
        }

        let (i, j) = (idx / self.n_phi, idx % self.n_phi);
        let ht = self.d_theta;
        let hp = self.d_phi;
        let (d1, d2): (&[(isize, f64)], &[(isize, f64)]) = if self.polar_band(i) {
            (&D1_O4, &D2_O4)
        } else {
            (&D1_O2, &D2_O2)
        };
        let sin_t = self.sin_theta[i];
        let cot_t = self.cos_theta[i] / sin_t;

        // grad = (phi_t, phi_p / sin)
        let g_t = merged(self.theta_stencil(i, j, d1, 1.0 / ht));
        let g_p = merged(self.phi_stencil(i, j, d1, 1.0 / (hp * sin_t)));

        // H_tt = phi_tt
        let h_tt = merged(self.theta_stencil(i, j, d2, 1.0 / (ht * ht)));

        // H_tp = (phi_tp - cot * phi_p) / sin
        let mut h_tp = self.mixed_stencil(i, j, d1, d1, 1.0 / (ht * hp * sin_t));
        push_scaled(
            &mut h_tp,
            &self.phi_stencil(i, j, d1, 1.0 / hp),
            -cot_t / sin_t,
        );
        let h_tp = merged(h_tp);

        // H_pp = phi_pp / sin^2 + cot * phi_t
        let mut h_pp = self.phi_stencil(i, j, d2, 1.0 / (hp * hp * sin_t * sin_t));
        push_scaled(&mut h_pp, &self.theta_stencil(i, j, d1, 1.0 / ht), cot_t);
        let h_pp = merged(h_pp);

        NodeOperator {
            base: idx,
            grad: [g_t, g_p],
            hess: [h_tt, h_tp, h_pp],
        }
    }

    /// Builds raw coordinate-derivative stencils for one node, at fourth
    /// order everywhere. These back the independent curvature measurement,
    /// which deliberately uses a different (higher-order) discretization
    /// than the solver's frame operators.
    pub(crate) fn coord_operator(&self, idx: usize) -> CoordOperator {
        if self.n == 1 {
            let h = self.d_phi;
            let j = idx;
            return CoordOperator {
                base: idx,
                d1: [merged(self.phi_stencil(0, j, &D1_O4, 1.0 / h)), Vec::new()],
                d2: [
                    merged(self.phi_stencil(0, j, &D2_O4, 1.0 / (h * h))),
                    Vec::new(),
                    Vec::new(),
                ],
            };
        }
        let (i, j) = (idx / self.n_phi, idx % self.n_phi);
        let ht = self.d_theta;
        let hp = self.d_phi;
        CoordOperator {
            base: idx,
            d1: [
                merged(self.theta_stencil(i, j, &D1_O4, 1.0 / ht)),
                merged(self.phi_stencil(i, j, &D1_O4, 1.0 / hp)),
            ],
            d2: [
                merged(self.theta_stencil(i, j, &D2_O4, 1.0 / (ht * ht))),
                merged(self.mixed_stencil(i, j, &D1_O4, &D1_O4, 1.0 / (ht * hp))),
                merged(self.phi_stencil(i, j, &D2_O4, 1.0 / (hp * hp))),
            ],
        }
    }
}

/// Applies a difference-form stencil to a value array.
pub(crate) fn apply(stencil: &[(usize, f64)], base: usize, values: &[f64]) -> f64 {
    let vb = values[base];
    stencil.iter().map(|&(q, c)| c * (values[q] - vb)).sum()
}
