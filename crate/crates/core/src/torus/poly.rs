//! Dense univariate polynomials over the integers.
//!
//! Coefficients are stored lowest degree first and kept normalized (no
//! trailing zeros), so the zero polynomial is the empty vector.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `x^n - 1`
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[0] = BigInt::from(-1);
        c[n] = BigInt::one();
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    /// gcd of the coefficients (non-negative).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = self.content();
        if self.leading().unwrap().is_negative() {
            c = -c;
        }
        Self::new(self.coeffs.iter().map(|a| a / &c).collect())
    }

    /// `x^deg * p(1/x)`.
    pub fn reciprocal(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Division with remainder in Z[x]. Returns `None` when some step would
    /// need a non-integral quotient coefficient (always succeeds for monic
    /// divisors).
    pub fn div_rem_exact(&self, divisor: &Self) -> Option<(Self, Self)> {
        let dd = divisor.degree()?;
        let lc = divisor.leading().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Some((Self::zero(), self.clone()));
        }
        let mut quot = vec![BigInt::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let (q, r) = rem[i].div_rem(lc);
            if !r.is_zero() {
                return None;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] -= &q * dc;
            }
            quot[i - dd] = q;
        }
        rem.truncate(dd);
        Some((Self::new(quot), Self::new(rem)))
    }

    /// True iff `divisor` divides `self` in Z[x].
    pub fn divisible_by(&self, divisor: &Self) -> bool {
        matches!(self.div_rem_exact(divisor), Some((_, r)) if r.is_zero())
    }

    /// Pseudo-remainder: `lc(b)^(deg a - deg b + 1) * a mod b`.
    pub fn pseudo_rem(&self, divisor: &Self) -> Self {
        let dd = divisor.degree().expect("pseudo_rem by zero polynomial");
        let lc = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        while rem.len() > dd {
            let top = rem.len() - 1;
            let lead = rem[top].clone();
            for c in rem.iter_mut() {
                *c *= &lc;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[top - dd + j] -= &lead * dc;
            }
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Self::new(rem)
    }

    /// Greatest common divisor over Q[x], returned primitive with positive
    /// leading coefficient (primitive remainder sequence).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part()
    }

    /// Product of the distinct irreducible factors.
    pub fn squarefree(&self) -> Self {
        let g = self.gcd(&self.derivative());
        let p = self.primitive_part();
        if g.degree().unwrap_or(0) == 0 {
            return p;
        }
        let (q, r) = p
            .div_rem_exact(&g)
            .expect("primitive gcd divides a primitive polynomial over Z");
        debug_assert!(r.is_zero());
        q.primitive_part()
    }

    pub fn eval_i64(&self, x: i64) -> BigInt {
        let x = BigInt::from(x);
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * &x + c)
    }

    /// Coefficients as f64 together with a flag telling whether the
    /// conversion was exact.
    pub fn to_f64(&self) -> (Vec<f64>, bool) {
        let mut exact = true;
        let v = self
            .coeffs
            .iter()
            .map(|c| {
                let f = c.to_f64().unwrap_or(f64::INFINITY);
                if c.bits() > 53 {
                    exact = false;
                }
                f
            })
            .collect();
        (v, exact)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{a}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{a}x^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}

pub fn euler_phi(mut m: u64) -> u64 {
    let mut result = m;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// Memoizing generator of cyclotomic polynomials.
#[derive(Default)]
pub struct CyclotomicCache {
    table: BTreeMap<u64, IntPoly>,
}

impl CyclotomicCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `Phi_m`, obtained by dividing `x^m - 1` by `Phi_e` for every proper divisor `e`.
    pub fn get(&mut self, m: u64) -> IntPoly {
        assert!(m >= 1);
        if let Some(p) = self.table.get(&m) {
            return p.clone();
        }
        let mut p = IntPoly::x_pow_minus_one(m as usize);
        for e in (1..m).filter(|e| m.is_multiple_of(*e)) {
            let phi_e = self.get(e);
            let (q, r) = p.div_rem_exact(&phi_e).expect("cyclotomic divisors are monic");
            debug_assert!(r.is_zero());
            p = q;
        }
        self.table.insert(m, p.clone());
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomics() {
        let mut cache = CyclotomicCache::new();
        assert_eq!(cache.get(1), IntPoly::from_i64(&[-1, 1]));
        assert_eq!(cache.get(2), IntPoly::from_i64(&[1, 1]));
        assert_eq!(cache.get(3), IntPoly::from_i64(&[1, 1, 1]));
        assert_eq!(cache.get(4), IntPoly::from_i64(&[1, 0, 1]));
        assert_eq!(cache.get(6), IntPoly::from_i64(&[1, -1, 1]));
        assert_eq!(cache.get(12), IntPoly::from_i64(&[1, 0, -1, 0, 1]));
        for m in 1..40u64 {
            assert_eq!(cache.get(m).degree().unwrap() as u64, euler_phi(m));
        }
    }

    #[test]
    fn totient_values() {
        let expected = [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(euler_phi(i as u64 + 1), e);
        }
    }

    #[test]
    fn gcd_and_squarefree() {
        // (x-1)^2 (x+2) and (x-1)(x+3)
        let a = IntPoly::from_i64(&[-1, 1])
            .mul(&IntPoly::from_i64(&[-1, 1]))
            .mul(&IntPoly::from_i64(&[2, 1]));
        let b = IntPoly::from_i64(&[-1, 1]).mul(&IntPoly::from_i64(&[3, 1]));
        assert_eq!(a.gcd(&b), IntPoly::from_i64(&[-1, 1]));
        let sf = a.squarefree();
        assert_eq!(sf, IntPoly::from_i64(&[-1, 1]).mul(&IntPoly::from_i64(&[2, 1])));
    }

    #[test]
    fn non_monic_division() {
        let a = IntPoly::from_i64(&[2, 0, 4]);
        let b = IntPoly::from_i64(&[1, 2]);
        // 4x^2 + 2 = (2x - 1)(2x + 1) + 3
        let (q, r) = a.div_rem_exact(&b).unwrap();
        assert_eq!(q, IntPoly::from_i64(&[-1, 2]));
        assert_eq!(r, IntPoly::from_i64(&[3]));
        assert!(IntPoly::from_i64(&[1, 3])
            .div_rem_exact(&IntPoly::from_i64(&[1, 2]))
            .is_none());
    }

    #[test]
    fn display() {
        assert_eq!(IntPoly::from_i64(&[1, -3, 1]).to_string(), "x^2 - 3x + 1");
    }
}
