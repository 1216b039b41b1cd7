use super::poly::IntPoly;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

pub type BigVec = Vec<BigInt>;
type BigMat = Vec<Vec<BigInt>>;

/// A unimodular integer matrix `S` inducing the automorphism `x -> S x` of
/// the d-torus. The characteristic polynomial and the integer inverse are
/// computed once at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutoMatrix {
    entries: BigMat,
    inverse: BigMat,
    det: i8,
    charpoly: IntPoly,
}

impl AutoMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let big: BigMat = rows
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        Self::from_big_rows(big)
    }

    pub fn from_big_rows(entries: BigMat) -> Result<Self> {
        let d = entries.len();
        if d == 0 || entries.iter().any(|r| r.len() != d) {
            return Err(Error::BadShape {
                rows: d,
                row_lens: entries.iter().map(Vec::len).collect(),
            });
        }
        let (charpoly, adj_neg) = faddeev_leverrier(&entries);
        // det(S) = (-1)^d * charpoly(0)
        let c0 = charpoly.coeffs().first().cloned().unwrap_or_default();
        let det = if d.is_multiple_of(2) { c0.clone() } else { -c0.clone() };
        let det = match det.to_i64() {
            Some(1) => 1i8,
            Some(-1) => -1i8,
            _ => return Err(Error::NotUnimodular(det.to_string())),
        };
        // S^{-1} = -M_d / c_0 with c_0 = +-1.
        let inverse = adj_neg
            .into_iter()
            .map(|row| row.into_iter().map(|v| -v * &c0).collect())
            .collect();
        let m = AutoMatrix {
            entries,
            inverse,
            det,
            charpoly,
        };
        debug_assert!(is_identity(&mat_mul(&m.entries, &m.inverse)));
        Ok(m)
    }

    /// Companion matrix of a monic integer polynomial given low-to-high,
    /// e.g. `[1, -3, 1]` for `x^2 - 3x + 1`.
    pub fn companion(monic_coeffs: &[i64]) -> Result<Self> {
        let d = monic_coeffs.len().saturating_sub(1);
        if d == 0 || monic_coeffs[d] != 1 {
            return Err(Error::InvalidParameter(
                "companion matrix needs a monic polynomial of degree >= 1".into(),
            ));
        }
        let mut rows = vec![vec![0i64; d]; d];
        for i in 1..d {
            rows[i][i - 1] = 1;
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row[d - 1] = -monic_coeffs[i];
        }
        Self::from_rows(&rows)
    }

    pub fn identity(d: usize) -> Self {
        let rows: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
        Self::from_rows(&rows).expect("identity is unimodular")
    }

    /// Block-diagonal sum of two automorphisms.
    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let (da, db) = (a.dim(), b.dim());
        let mut e = vec![vec![BigInt::zero(); da + db]; da + db];
        for i in 0..da {
            for j in 0..da {
                e[i][j] = a.entries[i][j].clone();
            }
        }
        for i in 0..db {
            for j in 0..db {
                e[da + i][da + j] = b.entries[i][j].clone();
            }
        }
        Self::from_big_rows(e).expect("block sum of unimodular matrices is unimodular")
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<BigInt>] {
        &self.entries
    }

    pub fn inverse_entries(&self) -> &[Vec<BigInt>] {
        &self.inverse
    }

    pub fn det(&self) -> i8 {
        self.det
    }

    /// Monic characteristic polynomial `det(xI - S)`.
    pub fn charpoly(&self) -> &IntPoly {
        &self.charpoly
    }

    pub fn inverse(&self) -> Self {
        Self::from_big_rows(self.inverse.clone()).expect("inverse of unimodular is unimodular")
    }

    pub fn transpose(&self) -> Self {
        Self::from_big_rows(transpose(&self.entries)).expect("transpose keeps the determinant")
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_big_rows(mat_mul(&self.entries, &other.entries))
            .expect("product of unimodular matrices is unimodular")
    }

    /// `U^{-1} S U`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.inverse().mul(self).mul(u)
    }

    /// Entries as i64, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|v| v.to_i64()).collect())
            .collect()
    }

    /// `S v`
    pub fn apply(&self, v: &[BigInt]) -> BigVec {
        mat_vec(&self.entries, v)
    }

    /// `S^T v`
    pub fn apply_transpose(&self, v: &[BigInt]) -> BigVec {
        mat_t_vec(&self.entries, v)
    }

    /// `(S^T)^{-1} v`
    pub fn apply_inverse_transpose(&self, v: &[BigInt]) -> BigVec {
        mat_t_vec(&self.inverse, v)
    }
}

/// Dual lattice action: `(S^T)^n k` in exact arithmetic, for any signed `n`.
pub fn dual_iterate(s: &AutoMatrix, k: &[BigInt], n: i64) -> BigVec {
    let mut v = k.to_vec();
    for _ in 0..n.unsigned_abs() {
        v = if n >= 0 {
            s.apply_transpose(&v)
        } else {
            s.apply_inverse_transpose(&v)
        };
    }
    v
}

/// `dual_iterate` on small integer vectors.
pub fn dual_iterate_i64(s: &AutoMatrix, k: &[i64], n: i64) -> BigVec {
    let big: BigVec = k.iter().map(|&x| BigInt::from(x)).collect();
    dual_iterate(s, &big, n)
}

fn mat_vec(m: &BigMat, v: &[BigInt]) -> BigVec {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn mat_t_vec(m: &BigMat, v: &[BigInt]) -> BigVec {
    let d = m.len();
    (0..d).map(|j| (0..d).map(|i| &m[i][j] * &v[i]).sum()).collect()
}

fn mat_mul(a: &BigMat, b: &BigMat) -> BigMat {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

fn transpose(a: &BigMat) -> BigMat {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i].clone()).collect()).collect()
}

fn is_identity(a: &BigMat) -> bool {
    a.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, v)| if i == j { v.is_one() } else { v.is_zero() })
    })
}

/// Faddeev-LeVerrier recursion. Returns the monic characteristic polynomial
/// and `M_d = S^{d-1} + c_{d-1} S^{d-2} + ... + c_1 I`, so that
/// `S M_d = -c_0 I`. Every division by `k` is exact over Z.
fn faddeev_leverrier(a: &BigMat) -> (IntPoly, BigMat) {
    let d = a.len();
    let mut coeffs = vec![BigInt::zero(); d + 1];
    coeffs[d] = BigInt::one();
    let mut m: BigMat = vec![vec![BigInt::zero(); d]; d];
    for k in 1..=d {
        // M_k = A M_{k-1} + c_{d-k+1} I
        let mut next = mat_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[d - k + 1];
        }
        m = next;
        let am = mat_mul(a, &m);
        let trace: BigInt = (0..d).map(|i| am[i][i].clone()).sum();
        let c = -trace / BigInt::from(k);
        coeffs[d - k] = c;
    }
    (IntPoly::new(coeffs), m)
}
