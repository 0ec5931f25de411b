//! Banded LU factorization with partial pivoting (LAPACK dgbtf2-style
//! storage) for the Newton linear systems.
//!
//! The folded Jacobian couples each node to stencil neighbours at most two
//! theta-rows away plus the half-turn images from pole and equator folding,
//! so with row-major node ordering it is banded with half-bandwidths of a
//! few times n_phi. Band storage is column-major with `2*kl + ku + 1` rows;
//! the extra `kl` rows hold the fill produced by row interchanges.

use crate::error::Error;
use crate::Result;

pub(crate) struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
        }
    }

    /// Accumulates `v` into entry (i, j); |i - j| must fit the bandwidths.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(j + self.kl >= i && i + self.ku >= j, "entry ({i},{j}) outside band");
        let r = self.kl + self.ku + i - j;
        self.ab[j * self.ldab + r] += v;
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku, ldab) = (self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;

        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // Pivot search in column j, rows j..=j+km.
            let col = j * ldab;
            let mut jp = 0usize;
            let mut best = self.ab[col + kv].abs();
            for p in 1..=km {
                let v = self.ab[col + kv + p].abs();
                if v > best {
                    best = v;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            let piv = self.ab[col + kv + jp];
            if piv == 0.0 {
                return Err(Error::LinearSolve(format!("zero pivot at column {j}")));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                // Swap rows j and j+jp across columns j..=ju.
                for c in j..=ju {
                    let base = c * ldab + kv + j - c;
                    self.ab.swap(base, base + jp);
                }
            }
            if km > 0 {
                let inv = 1.0 / self.ab[col + kv];
                for p in 1..=km {
                    self.ab[col + kv + p] *= inv;
                }
                for c in j + 1..=ju {
                    let head = c * ldab + kv + j - c;
                    let mult = self.ab[head];
                    if mult != 0.0 {
                        for p in 1..=km {
                            let l = self.ab[col + kv + p];
                            self.ab[head + p] -= l * mult;
                        }
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ldab,
            kv,
            ab: self.ab,
            ipiv,
        })
    }
}

pub(crate) struct BandLu {
    n: usize,
    kl: usize,
    ldab: usize,
    kv: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Solves A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        // Forward: apply L and the recorded interchanges.
        for j in 0..n.saturating_sub(1) {
            let p = self.ipiv[j];
            if p != j {
                b.swap(p, j);
            }
            let km = self.kl.min(n - 1 - j);
            let col = j * self.ldab + self.kv;
            let bj = b[j];
            for i in 1..=km {
                b[j + i] -= self.ab[col + i] * bj;
            }
        }
        // Backward: U has bandwidth kv above the diagonal.
        for j in (0..n).rev() {
            let col = j * self.ldab + self.kv;
            let xj = b[j] / self.ab[col];
            b[j] = xj;
            let lo = j.saturating_sub(self.kv);
            for i in lo..j {
                b[i] -= self.ab[j * self.ldab + self.kv + i - j] * xj;
            }
        }
    }
}
