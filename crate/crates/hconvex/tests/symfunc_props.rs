//! Property tests for the symmetric-function calculus: each test states an
//! algebraic fact that must hold for arbitrary admissible inputs, not just
//! the worked examples.

use proptest::prelude::*;

use hconvex::symfunc::{
    in_garding_cone, newton_maclaurin_gap, quotient_f, sigma, sigma_gradient, sigma_matrix,
    sum_bound_gap, EigenVector, SymMatrix,
};

fn positive_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05..3.0_f64, n..=n)
}

fn sym_matrix(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-2.0..2.0_f64, n * n..=n * n).prop_map(move |v| {
        let mut m = SymMatrix::zeros(n).unwrap();
        for i in 0..n {
            for j in i..n {
                m.set(i, j, v[i * n + j]);
            }
        }
        m
    })
}

fn pd_matrix(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-1.0..1.0_f64, n * n..=n * n).prop_map(move |v| {
        // M^T M + I/10 is positive definite.
        let mut m = SymMatrix::zeros(n).unwrap();
        for i in 0..n {
            for j in i..n {
                let dot: f64 = (0..n).map(|r| v[r * n + i] * v[r * n + j]).sum();
                m.set(i, j, dot + if i == j { 0.1 } else { 0.0 });
            }
        }
        m
    })
}

/// R A R^T for a rotation R, re-symmetrized against rounding.
fn conjugate(a: &SymMatrix, r: &[[f64; 3]; 3]) -> SymMatrix {
    let n = a.n();
    let mut out = SymMatrix::zeros(n).unwrap();
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for p in 0..n {
                for q in 0..n {
                    acc += r[i][p] * a.get(p, q) * r[j][q];
                }
            }
            out.set(i, j, acc);
        }
    }
    out
}

fn rotation3(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    // Product of Givens rotations in the (0,1), (0,2), (1,2) planes.
    let (ca, sa) = (a.cos(), a.sin());
    let (cb, sb) = (b.cos(), b.sin());
    let (cc, sc) = (c.cos(), c.sin());
    let g1 = [[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]];
    let g2 = [[cb, 0.0, -sb], [0.0, 1.0, 0.0], [sb, 0.0, cb]];
    let g3 = [[1.0, 0.0, 0.0], [0.0, cc, -sc], [0.0, sc, cc]];
    let mul = |x: &[[f64; 3]; 3], y: &[[f64; 3]; 3]| {
        let mut z = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                z[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        z
    };
    mul(&mul(&g1, &g2), &g3)
}

proptest! {
    /// Positive vectors lie in every Garding cone up to their dimension.
    #[test]
    fn positive_vectors_fill_all_cones(vals in positive_vec(3)) {
        let lam = EigenVector::new(&vals).unwrap();
        for k in 1..=3 {
            prop_assert!(in_garding_cone(&lam, k).unwrap());
        }
    }

    /// The generalized Newton-MacLaurin gap is non-negative on the cone and
    /// vanishes on equal positive entries.
    #[test]
    fn newton_maclaurin_nonnegative(vals in positive_vec(3)) {
        let lam = EigenVector::new(&vals).unwrap();
        for (k, l, r, s) in [(2, 0, 1, 0), (3, 0, 1, 0), (3, 1, 2, 1), (2, 1, 2, 1), (3, 0, 2, 0)] {
            let gap = newton_maclaurin_gap(&lam, k, l, r, s).unwrap();
            prop_assert!(gap >= -1e-12, "gap({k},{l},{r},{s}) = {gap}");
        }
    }

    /// The derivative sum bound holds on the cone.
    #[test]
    fn sum_bound_nonnegative(vals in positive_vec(3)) {
        let lam = EigenVector::new(&vals).unwrap();
        for (k, l) in [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)] {
            let gap = sum_bound_gap(&lam, k, l).unwrap();
            prop_assert!(gap >= -1e-10, "gap({k},{l}) = {gap}");
        }
    }

    /// Increasing any eigenvalue of a positive definite matrix strictly
    /// increases the quotient F.
    #[test]
    fn quotient_monotone_in_eigenvalues(
        vals in positive_vec(2),
        bump in 0.01..0.5_f64,
        slot in 0usize..2,
        k in 1usize..=2,
    ) {
        let a = SymMatrix::diag(&vals).unwrap();
        let mut b = a;
        b.set(slot, slot, a.get(slot, slot) + bump);
        let fa = quotient_f(&a, k).unwrap();
        let fb = quotient_f(&b, k).unwrap();
        prop_assert!(fb > fa, "F({fb}) should exceed F({fa})");
    }

    /// sigma_k is invariant under orthogonal conjugation.
    #[test]
    fn sigma_rotation_invariant(
        a in pd_matrix(3),
        ra in 0.0..std::f64::consts::TAU,
        rb in 0.0..std::f64::consts::TAU,
        rc in 0.0..std::f64::consts::TAU,
    ) {
        let rot = rotation3(ra, rb, rc);
        let b = conjugate(&a, &rot);
        for k in 0..=3 {
            let sa = sigma_matrix(&a, k).unwrap();
            let sb = sigma_matrix(&b, k).unwrap();
            prop_assert!((sa - sb).abs() <= 1e-12 * sa.abs().max(1.0), "k={k}: {sa} vs {sb}");
        }
    }

    /// The gradient tensor is the derivative of sigma_matrix along random
    /// symmetric directions.
    #[test]
    fn gradient_is_directional_derivative(
        a in sym_matrix(3),
        dir in sym_matrix(3),
        k in 1usize..=3,
    ) {
        let g = sigma_gradient(&a, k).unwrap();
        let eps = 1e-6;
        let mix = |s: f64| {
            let mut m = a;
            for i in 0..3 {
                for j in i..3 {
                    m.set(i, j, a.get(i, j) + s * dir.get(i, j));
                }
            }
            m
        };
        let fd = (sigma_matrix(&mix(eps), k).unwrap() - sigma_matrix(&mix(-eps), k).unwrap())
            / (2.0 * eps);
        let mut analytic = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                analytic += g.get(i, j) * dir.get(i, j);
            }
        }
        prop_assert!((fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0), "{fd} vs {analytic}");
    }

    /// Matrix sigma equals vector sigma of the eigenvalues.
    #[test]
    fn sigma_matrix_matches_eigenvalues(a in sym_matrix(3), k in 0usize..=3) {
        let sm = sigma_matrix(&a, k).unwrap();
        let sv = sigma(&a.eigenvalues(), k).unwrap();
        prop_assert!((sm - sv).abs() <= 1e-10 * sm.abs().max(1.0), "{sm} vs {sv}");
    }
}
