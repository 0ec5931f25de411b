//! Elementary symmetric function calculus on eigenvalue vectors and small
//! symmetric matrices (n <= 3).
//!
//! The solver works with the quotient `F(A) = (sigma_n(A)/sigma_{n-k}(A))^{1/k}`
//! on positive definite matrices; its ellipticity and concavity rest on the
//! Garding cone structure and Newton-MacLaurin type inequalities, which this
//! module exposes as checkable gaps (always >= 0 on the admissible cone).
//!
//! Everything here is closed form: sigma_k of a matrix is computed from the
//! trace/determinant invariants, eigenvalues use the quadratic and cubic
//! (trigonometric) formulas, and the derivative tensors have explicit
//! expressions. All functions are pure.

use crate::error::Error;
use crate::Result;

/// Maximum supported dimension.
pub const MAX_N: usize = 3;

/// An ordered list of n real eigenvalues, n in {1, 2, 3}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenVector {
    n: usize,
    vals: [f64; MAX_N],
}

impl EigenVector {
    /// Builds an eigenvalue vector, validating length and finiteness.
    pub fn new(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 || n > MAX_N {
            return Err(Error::Argument(format!(
                "eigenvalue vector length must be 1..=3, got {n}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("eigenvalue vector has non-finite entry".into()));
        }
        let mut vals = [0.0; MAX_N];
        vals[..n].copy_from_slice(values);
        Ok(Self { n, vals })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.vals[..self.n]
    }

    /// Smallest entry.
    pub fn min(&self) -> f64 {
        self.values().iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// An n x n real symmetric matrix, n in {1, 2, 3}. Storage keeps a single
/// copy of each off-diagonal entry, so `get(i, j) == get(j, i)` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix {
    n: usize,
    // Upper triangle, row-major: (0,0) (0,1) (0,2) (1,1) (1,2) (2,2).
    upper: [f64; 6],
}

impl SymMatrix {
    fn slot(i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        match (a, b) {
            (0, 0) => 0,
            (0, 1) => 1,
            (0, 2) => 2,
            (1, 1) => 3,
            (1, 2) => 4,
            (2, 2) => 5,
            _ => unreachable!("index out of range for 3x3 symmetric matrix"),
        }
    }

    /// Zero matrix of dimension n.
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::Argument(format!("matrix dimension must be 1..=3, got {n}")));
        }
        Ok(Self { n, upper: [0.0; 6] })
    }

    /// Builds from full rows; off-diagonal pairs must agree exactly.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Argument("matrix rows must have length n".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Argument("matrix entry not finite".into()));
                }
                if j > i && rows[j][i] != v {
                    return Err(Error::Argument(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    /// Diagonal matrix.
    pub fn diag(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        Ok(m)
    }

    /// Scaled identity t * I of dimension n.
    pub fn scaled_identity(n: usize, t: f64) -> Result<Self> {
        Self::diag(&vec![t; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n && j < self.n);
        self.upper[Self::slot(i, j)]
    }

    /// Sets entry (i, j) and its mirror (j, i) simultaneously.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.upper[Self::slot(i, j)] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Determinant (n <= 3 closed forms).
    pub fn det(&self) -> f64 {
        match self.n {
            1 => self.get(0, 0),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            3 => {
                let a = self.get(0, 0);
                let b = self.get(0, 1);
                let c = self.get(0, 2);
                let d = self.get(1, 1);
                let e = self.get(1, 2);
                let f = self.get(2, 2);
                a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c)
            }
            _ => unreachable!(),
        }
    }

    /// Eigenvalues in ascending order, by the quadratic / trigonometric cubic
    /// formula. Exact for n = 1, stable closed forms otherwise.
    pub fn eigenvalues(&self) -> EigenVector {
        let vals: Vec<f64> = match self.n {
            1 => vec![self.get(0, 0)],
            2 => {
                let a = self.get(0, 0);
                let d = self.get(1, 1);
                let b = self.get(0, 1);
                let mid = 0.5 * (a + d);
                let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
                vec![mid - rad, mid + rad]
            }
            3 => {
                let p1 = self.get(0, 1).powi(2) + self.get(0, 2).powi(2) + self.get(1, 2).powi(2);
                if p1 == 0.0 {
                    let mut d = [self.get(0, 0), self.get(1, 1), self.get(2, 2)];
                    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    d.to_vec()
                } else {
                    let q = self.trace() / 3.0;
                    let p2 = (self.get(0, 0) - q).powi(2)
                        + (self.get(1, 1) - q).powi(2)
                        + (self.get(2, 2) - q).powi(2)
                        + 2.0 * p1;
                    let p = (p2 / 6.0).sqrt();
                    let mut b = *self;
                    for i in 0..3 {
                        b.set(i, i, b.get(i, i) - q);
                    }
                    let r = (b.det() / (2.0 * p * p * p)).clamp(-1.0, 1.0);
                    let phi = r.acos() / 3.0;
                    let hi = q + 2.0 * p * phi.cos();
                    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
                    let mid = 3.0 * q - hi - lo;
                    vec![lo, mid, hi]
                }
            }
            _ => unreachable!(),
        };
        EigenVector::new(&vals).expect("eigenvalues of a valid matrix")
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().min()
    }

    /// Positive definiteness via the smallest eigenvalue.
    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }
}

/// Binomial coefficient C(n, k) as f64 (small arguments only).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k.min(n - k) {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

fn check_k(k: usize, n: usize, lo: usize) -> Result<()> {
    if k < lo || k > n {
        return Err(Error::Argument(format!(
            "symmetric function order k = {k} out of range {lo}..={n}"
        )));
    }
    Ok(())
}

/// k-th elementary symmetric polynomial of the eigenvalue vector,
/// with sigma_0 = 1 and sigma_n = product of entries.
pub fn sigma(lambda: &EigenVector, k: usize) -> Result<f64> {
    check_k(k, lambda.n(), 0)?;
    let v = lambda.values();
    Ok(match (lambda.n(), k) {
        (_, 0) => 1.0,
        (1, 1) => v[0],
        (2, 1) => v[0] + v[1],
        (2, 2) => v[0] * v[1],
        (3, 1) => v[0] + v[1] + v[2],
        (3, 2) => v[0] * v[1] + v[0] * v[2] + v[1] * v[2],
        (3, 3) => v[0] * v[1] * v[2],
        _ => unreachable!(),
    })
}

/// sigma_k of a symmetric matrix, through the trace/determinant invariants
/// (equals sigma_k of its eigenvalue vector, but exact under conjugation).
pub fn sigma_matrix(a: &SymMatrix, k: usize) -> Result<f64> {
    check_k(k, a.n(), 0)?;
    let n = a.n();
    Ok(match (n, k) {
        (_, 0) => 1.0,
        (_, 1) => a.trace(),
        (2, 2) => a.det(),
        (3, 2) => {
            // sigma_2 = sum of principal 2x2 minors.
            let m01 = a.get(0, 0) * a.get(1, 1) - a.get(0, 1).powi(2);
            let m02 = a.get(0, 0) * a.get(2, 2) - a.get(0, 2).powi(2);
            let m12 = a.get(1, 1) * a.get(2, 2) - a.get(1, 2).powi(2);
            m01 + m02 + m12
        }
        (3, 3) => a.det(),
        _ => unreachable!(),
    })
}

/// Gradient matrix of sigma_k with all n^2 entries treated as independent:
/// `d sigma_k = sum_ij grad_ij dA_ij`. Closed forms:
/// sigma_1' = I, sigma_2' = (tr A) I - A, sigma_3' = adjugate(A).
pub fn sigma_gradient(a: &SymMatrix, k: usize) -> Result<SymMatrix> {
    check_k(k, a.n(), 1)?;
    let n = a.n();
    let mut g = SymMatrix::zeros(n)?;
    match k {
        1 => {
            for i in 0..n {
                g.set(i, i, 1.0);
            }
        }
        2 => {
            let t = a.trace();
            for i in 0..n {
                for j in i..n {
                    let d = if i == j { 1.0 } else { 0.0 };
                    g.set(i, j, t * d - a.get(i, j));
                }
            }
        }
        3 => {
            // Adjugate of a symmetric 3x3 (cofactor matrix; symmetric itself).
            let c = |i: usize, j: usize| a.get(i, j);
            g.set(0, 0, c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1));
            g.set(0, 1, -(c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0)));
            g.set(0, 2, c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
            g.set(1, 1, c(0, 0) * c(2, 2) - c(0, 2) * c(2, 0));
            g.set(1, 2, -(c(0, 0) * c(2, 1) - c(0, 1) * c(2, 0)));
            g.set(2, 2, c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0));
        }
        _ => unreachable!(),
    }
    Ok(g)
}

/// The quotient `F(A) = (sigma_n(A) / sigma_{n-k}(A))^{1/k}` on positive
/// definite matrices. Errors with the smallest eigenvalue when A is not
/// positive definite.
pub fn quotient_f(a: &SymMatrix, k: usize) -> Result<f64> {
    let n = a.n();
    check_k(k, n, 1)?;
    let min_eig = a.min_eigenvalue();
    if min_eig <= 0.0 {
        return Err(Error::ConeViolation { node: 0, min_eig });
    }
    let num = sigma_matrix(a, n)?;
    let den = sigma_matrix(a, n - k)?;
    Ok((num / den).powf(1.0 / k as f64))
}

/// Membership in the Garding cone Gamma_k: sigma_i(lambda) > 0 for all
/// 1 <= i <= k.
pub fn in_garding_cone(lambda: &EigenVector, k: usize) -> Result<bool> {
    check_k(k, lambda.n(), 1)?;
    for i in 1..=k {
        if sigma(lambda, i)? <= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn require_cone(lambda: &EigenVector, k: usize) -> Result<()> {
    if !in_garding_cone(lambda, k)? {
        return Err(Error::ConeViolation {
            node: 0,
            min_eig: lambda.min(),
        });
    }
    Ok(())
}

/// Normalized quotient `[(sigma_a / C_n^a) / (sigma_b / C_n^b)]^{1/(a-b)}`
/// for a > b on Gamma_a vectors.
fn normalized_ratio(lambda: &EigenVector, a: usize, b: usize) -> Result<f64> {
    let n = lambda.n();
    let num = sigma(lambda, a)? / binomial(n, a);
    let den = sigma(lambda, b)? / binomial(n, b);
    Ok((num / den).powf(1.0 / (a - b) as f64))
}

/// Gap of the generalized Newton-MacLaurin inequality: for lambda in Gamma_k
/// and k > l >= 0, r > s >= 0, k >= r, l >= s,
///
/// ```text
///   [ (sigma_r/C_n^r) / (sigma_s/C_n^s) ]^{1/(r-s)}
/// - [ (sigma_k/C_n^k) / (sigma_l/C_n^l) ]^{1/(k-l)}  >=  0,
/// ```
///
/// with equality iff all entries are equal and positive.
pub fn newton_maclaurin_gap(
    lambda: &EigenVector,
    k: usize,
    l: usize,
    r: usize,
    s: usize,
) -> Result<f64> {
    let n = lambda.n();
    if !(k > l && r > s && k >= r && l >= s && k <= n) {
        return Err(Error::Argument(format!(
            "inadmissible Newton-MacLaurin indices (k,l,r,s) = ({k},{l},{r},{s}) for n = {n}"
        )));
    }
    require_cone(lambda, k)?;
    Ok(normalized_ratio(lambda, r, s)? - normalized_ratio(lambda, k, l)?)
}

/// sigma_k of the vector with entry `skip` removed (sigma_{-1} := 0).
fn sigma_without(lambda: &EigenVector, k: isize, skip: usize) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let rest: Vec<f64> = lambda
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .map(|(_, &v)| v)
        .collect();
    let k = k as usize;
    if k > rest.len() {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    if rest.is_empty() {
        return 0.0;
    }
    let ev = EigenVector::new(&rest).expect("reduced eigenvalue vector");
    sigma(&ev, k).expect("k validated above")
}

/// Gap of the derivative sum bound for the quotient
/// `Q = (sigma_k/sigma_l)^{1/(k-l)}`:
///
/// ```text
///   sum_i dQ/dlambda_i  -  (C_n^k / C_n^l)^{1/(k-l)}  >=  0
/// ```
///
/// on Gamma_k, n >= k > l >= 0. Derivatives are evaluated in closed form
/// through dsigma_k/dlambda_i = sigma_{k-1}(lambda with i removed).
pub fn sum_bound_gap(lambda: &EigenVector, k: usize, l: usize) -> Result<f64> {
    let n = lambda.n();
    if !(k > l && k <= n) {
        return Err(Error::Argument(format!(
            "inadmissible sum-bound indices (k,l) = ({k},{l}) for n = {n}"
        )));
    }
    require_cone(lambda, k)?;
    let sk = sigma(lambda, k)?;
    let sl = sigma(lambda, l)?;
    let p = 1.0 / (k - l) as f64;
    let q = (sk / sl).powf(p);
    let mut sum = 0.0;
    for i in 0..n {
        let dk = sigma_without(lambda, k as isize - 1, i);
        let dl = sigma_without(lambda, l as isize - 1, i);
        sum += q * p * (dk / sk - dl / sl);
    }
    Ok(sum - (binomial(n, k) / binomial(n, l)).powf(p))
}
