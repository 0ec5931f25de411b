//! Independent end-to-end oracle: reconstruct the hypersurface from a solved
//! support function, re-measure its curvatures by discrete differential
//! geometry in the Minkowski ambient, and compare against the prescription.
//!
//! The measurement path uses only the embedded points and Minkowski pairings
//! (plus the closed-form normals carried by the patch): finite-difference
//! tangents give the induced metric `g_ab = <T_a, T_b>`, ambient second
//! differences projected on the normal give the second fundamental form
//! `h_ab = -<d_a d_b X, nu>`, and the shape operator `g^{-1} h` yields the
//! principal curvatures. It never touches A[phi] or the shifted Weingarten
//! matrix, so agreement with the support-function calculus is a genuine
//! cross-check of the embedding, the frame conversion and the reduction of
//! the curvature equation. Sign conventions are pinned by the geodesic
//! sphere: a constant support function must measure kappa = coth(rho) > 1.


use crate::error::Error;
use crate::horo::{
    self, build_a, embed, mink, null_vec, shifted_weingarten, HyperboloidPatch, MinkVec,
    ShiftedCurvatures, SupportFunction,
};
use crate::solver::{apriori_bounds, midpoint_check, ProblemSpec};
use crate::sphere::{apply, ScalarField, SphereGrid};
use crate::Result;

/// A named runtime monitor with its measured value and verdict.
#[derive(Debug, Clone)]
pub struct Monitor {
    pub name: &'static str,
    pub value: f64,
    pub pass: bool,
}

/// Quantification of the defining equation: measured versus prescribed
/// k-th shifted mean curvature, plus the a priori monitor suite.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub h_tilde_k_measured: ScalarField,
    pub h_tilde_k_prescribed: ScalarField,
    pub linf_rel_error: f64,
    pub l2_rel_error: f64,
    pub min_kappa_tilde: f64,
    pub monitors: Vec<Monitor>,
}

impl CurvatureReport {
    pub fn all_monitors_pass(&self) -> bool {
        self.monitors.iter().all(|m| m.pass)
    }
}

/// Per-component value arrays of a patch, for differentiation.
fn component_arrays(patch: &HyperboloidPatch) -> [Vec<f64>; 4] {
    let mut out = [(); 4].map(|_| Vec::with_capacity(patch.points().len()));
    for p in patch.points() {
        for c in 0..4 {
            out[c].push(p[c]);
        }
    }
    out
}

/// Measures the shifted principal curvatures of an embedded patch by
/// finite-difference geometry. Errors if the induced metric degenerates or
/// a measured curvature drops to 1 or below (h-convexity lost).
pub fn measure_curvatures(patch: &HyperboloidPatch, k: usize) -> Result<ShiftedCurvatures> {
    let grid = patch.grid().clone();
    let n = grid.dim();
    let comps = component_arrays(patch);

    let mut kappa = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let op = grid.coord_operator(idx);
        let nu = patch.normals()[idx];

        let mut t = [[0.0_f64; 4]; 2]; // tangents d_theta X, d_phi X
        let mut m = [[0.0_f64; 4]; 3]; // second derivatives tt, tp, pp
        for c in 0..4 {
            let vals = &comps[c];
            t[0][c] = apply(&op.d1[0], op.base, vals);
            m[0][c] = apply(&op.d2[0], op.base, vals);
            if n == 2 {
                t[1][c] = apply(&op.d1[1], op.base, vals);
                m[1][c] = apply(&op.d2[1], op.base, vals);
                m[2][c] = apply(&op.d2[2], op.base, vals);
            }
        }

        if n == 1 {
            let g = mink(&t[0], &t[0]);
            if g <= 0.0 {
                return Err(Error::Geometry(format!("degenerate induced metric at node {idx}")));
            }
            let h = -mink(&m[0], &nu);
            kappa.push([h / g - 1.0, 0.0]);
        } else {
            let g11 = mink(&t[0], &t[0]);
            let g12 = mink(&t[0], &t[1]);
            let g22 = mink(&t[1], &t[1]);
            let det_g = g11 * g22 - g12 * g12;
            if !(g11 > 0.0 && det_g > 0.0) {
                return Err(Error::Geometry(format!("degenerate induced metric at node {idx}")));
            }
            let h11 = -mink(&m[0], &nu);
            let h12 = -mink(&m[1], &nu);
            let h22 = -mink(&m[2], &nu);
            // Generalized eigenvalues of (h, g): roots of
            // det_g k^2 - (h11 g22 + h22 g11 - 2 h12 g12) k + det_h = 0.
            let b = h11 * g22 + h22 * g11 - 2.0 * h12 * g12;
            let det_h = h11 * h22 - h12 * h12;
            let disc = (b * b - 4.0 * det_g * det_h).max(0.0).sqrt();
            let k1 = (b - disc) / (2.0 * det_g);
            let k2 = (b + disc) / (2.0 * det_g);
            kappa.push([k1 - 1.0, k2 - 1.0]);
        }
    }
    ShiftedCurvatures::from_values(&grid, kappa, k)
}

fn slack(grid: &SphereGrid) -> f64 {
    let h = grid.spacing();
    10.0 * h * h
}

/// The a priori monitors that depend only on the iterate and its embedding
/// (not on the curvature measurement): midpoint inequality, a priori
/// bracket, hyperboloid identity and evenness defect.
pub fn state_monitors(spec: &ProblemSpec, sf: &SupportFunction, patch: &HyperboloidPatch) -> Vec<Monitor> {
    let eps = slack(sf.grid());
    let (lo, hi) = apriori_bounds(spec);
    let mid = midpoint_check(sf);
    let hyp = patch
        .points()
        .iter()
        .map(|p| (mink(p, p) + 1.0).abs())
        .fold(0.0, f64::max);
    let evenness = sf.phi().evenness_defect();
    vec![
        Monitor {
            name: "midpoint_inequality",
            value: mid,
            pass: mid >= -eps,
        },
        Monitor {
            name: "apriori_lower",
            value: sf.phi().min() - lo,
            pass: sf.phi().min() >= lo - eps,
        },
        Monitor {
            name: "apriori_upper",
            value: hi - sf.phi().max(),
            pass: sf.phi().max() <= hi + eps,
        },
        Monitor {
            name: "hyperboloid_identity",
            value: hyp,
            pass: hyp <= 1e-12,
        },
        Monitor {
            name: "evenness_defect",
            value: evenness,
            pass: evenness <= 1e-12,
        },
    ]
}

/// Compares measured curvatures against the prescription and attaches the
/// monitor suite (curvature positivity, midpoint inequality, a priori
/// bracket, hyperboloid identity, evenness defect).
pub fn compare(
    measured: &ShiftedCurvatures,
    spec: &ProblemSpec,
    sf: &SupportFunction,
    patch: &HyperboloidPatch,
) -> Result<CurvatureReport> {
    let grid = measured.h_tilde_k.grid();
    if !grid.same_layout(spec.grid()) || !grid.same_layout(sf.grid()) || !grid.same_layout(patch.grid()) {
        return Err(Error::GridMismatch("compare inputs live on different grids".into()));
    }
    if measured.k != spec.k() {
        return Err(Error::Argument(format!(
            "curvature order mismatch: measured k = {}, prescribed k = {}",
            measured.k,
            spec.k()
        )));
    }

    let prescribed = spec.f_tilde();
    let mut linf = 0.0_f64;
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for idx in 0..grid.node_count() {
        let p = prescribed.values()[idx];
        let d = measured.h_tilde_k.values()[idx] - p;
        linf = linf.max((d / p).abs());
        let w = grid.weights()[idx];
        num += w * d * d;
        den += w * p * p;
    }
    let l2 = (num / den).sqrt();

    let min_kt = measured.min_kappa_tilde();
    let mut monitors = vec![Monitor {
        name: "kappa_tilde_positive",
        value: min_kt,
        pass: min_kt > 0.0,
    }];
    monitors.extend(state_monitors(spec, sf, patch));

    Ok(CurvatureReport {
        h_tilde_k_measured: measured.h_tilde_k.clone(),
        h_tilde_k_prescribed: prescribed.clone(),
        linf_rel_error: linf,
        l2_rel_error: l2,
        min_kappa_tilde: min_kt,
        monitors,
    })
}

/// Maximum spectral distance between the shifted Weingarten eigenvalues from
/// the support-function calculus and the measured shifted curvatures of the
/// embedded patch. O(h^2) for smooth support functions.
pub fn weingarten_crosscheck(sf: &SupportFunction) -> Result<f64> {
    let n = sf.grid().dim();
    let a = build_a(sf);
    let w = shifted_weingarten(sf, &a)?;
    let analytic = horo::shifted_curvatures(&w, 1)?;
    let measured = measure_curvatures(&embed(sf), 1)?;
    let mut worst = 0.0_f64;
    for idx in 0..sf.grid().node_count() {
        for c in 0..n {
            worst = worst.max((analytic.kappa_tilde[idx][c] - measured.kappa_tilde[idx][c]).abs());
        }
    }
    Ok(worst)
}

fn det3(r0: [f64; 3], r1: [f64; 3], r2: [f64; 3]) -> f64 {
    r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
        + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0])
}

/// Finite-difference outward normals: the unit spacelike vector Minkowski
/// orthogonal to the position and the FD tangents, oriented so that
/// `<nu, (x,1)> < 0`. Used to cross-check the closed-form patch normals.
pub fn fd_normals(patch: &HyperboloidPatch) -> Result<Vec<MinkVec>> {
    let grid = patch.grid().clone();
    let n = grid.dim();
    let comps = component_arrays(patch);
    let eta = |v: &MinkVec| [v[0], v[1], v[2], -v[3]];

    let mut out = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let op = grid.coord_operator(idx);
        let x = patch.points()[idx];
        let mut tangents = [[0.0_f64; 4]; 2];
        for c in 0..4 {
            tangents[0][c] = apply(&op.d1[0], op.base, &comps[c]);
            if n == 2 {
                tangents[1][c] = apply(&op.d1[1], op.base, &comps[c]);
            }
        }
        let w: MinkVec = if n == 2 {
            // 4-D generalized cross product of the eta-images.
            let a = eta(&x);
            let b = eta(&tangents[0]);
            let c = eta(&tangents[1]);
            [
                det3([a[1], a[2], a[3]], [b[1], b[2], b[3]], [c[1], c[2], c[3]]),
                -det3([a[0], a[2], a[3]], [b[0], b[2], b[3]], [c[0], c[2], c[3]]),
                det3([a[0], a[1], a[3]], [b[0], b[1], b[3]], [c[0], c[1], c[3]]),
                -det3([a[0], a[1], a[2]], [b[0], b[1], b[2]], [c[0], c[1], c[2]]),
            ]
        } else {
            // Active components (s1, s2, t): 3-D cross product there.
            let a = eta(&x);
            let b = eta(&tangents[0]);
            let cx = [a[0], a[1], a[3]];
            let cy = [b[0], b[1], b[3]];
            let cr = [
                cx[1] * cy[2] - cx[2] * cy[1],
                cx[2] * cy[0] - cx[0] * cy[2],
                cx[0] * cy[1] - cx[1] * cy[0],
            ];
            [cr[0], cr[1], 0.0, cr[2]]
        };
        let norm_sq = mink(&w, &w);
        if norm_sq <= 0.0 {
            return Err(Error::Geometry(format!(
                "finite-difference normal not spacelike at node {idx}"
            )));
        }
        let mut nu = w.map(|v| v / norm_sq.sqrt());
        if mink(&nu, &null_vec(&grid.node(idx))) > 0.0 {
            nu = nu.map(|v| -v);
        }
        out.push(nu);
    }
    Ok(out)
}
