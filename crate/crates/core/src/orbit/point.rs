use super::modq::ModQ;
use crate::error::{Error, Result};
use crate::fourier::{sup_norm, FourierFunction};
use crate::torus::AutoMatrix;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use std::f64::consts::TAU;

/// A point of the grid `(1/Q) Z^d` on the torus, stored as its numerators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactTorusPoint {
    pub numerators: Vec<u64>,
    pub modulus: u64,
}

impl ExactTorusPoint {
    pub fn coordinates(&self) -> Vec<f64> {
        self.numerators
            .iter()
            .map(|&a| a as f64 / self.modulus as f64)
            .collect()
    }
}

/// `S` and `S^{-1}` reduced mod `Q`, row-major.
#[derive(Clone, Debug)]
pub struct ModMatrix {
    field: ModQ,
    dim: usize,
    forward: Vec<u64>,
    backward: Vec<u64>,
}

fn reduce_rows(field: &ModQ, rows: &[Vec<BigInt>]) -> Vec<u64> {
    let q = BigInt::from(field.modulus());
    rows.iter()
        .flatten()
        .map(|v| {
            let r = ((v % &q) + &q) % &q;
            r.to_u64().unwrap()
        })
        .collect()
}

impl ModMatrix {
    pub fn new(s: &AutoMatrix, q: u64) -> Self {
        let field = ModQ::new(q);
        ModMatrix {
            field,
            dim: s.dim(),
            forward: reduce_rows(&field, s.entries()),
            backward: reduce_rows(&field, s.inverse_entries()),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.field.modulus()
    }

    fn apply(&self, m: &[u64], x: &[u64], out: &mut [u64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.field.dot(&m[i * self.dim..(i + 1) * self.dim], x);
        }
    }

    /// `x <- S x mod Q`
    pub fn step(&self, x: &mut Vec<u64>, scratch: &mut Vec<u64>) {
        scratch.resize(self.dim, 0);
        self.apply(&self.forward, x, scratch);
        std::mem::swap(x, scratch);
    }

    /// `x <- S^{-1} x mod Q`
    pub fn step_back(&self, x: &mut Vec<u64>, scratch: &mut Vec<u64>) {
        scratch.resize(self.dim, 0);
        self.apply(&self.backward, x, scratch);
        std::mem::swap(x, scratch);
    }

    pub fn forward(&self, p: &ExactTorusPoint) -> ExactTorusPoint {
        let mut x = p.numerators.clone();
        self.step(&mut x, &mut Vec::new());
        ExactTorusPoint {
            numerators: x,
            modulus: p.modulus,
        }
    }

    pub fn backward(&self, p: &ExactTorusPoint) -> ExactTorusPoint {
        let mut x = p.numerators.clone();
        self.step_back(&mut x, &mut Vec::new());
        ExactTorusPoint {
            numerators: x,
            modulus: p.modulus,
        }
    }
}

/// An observable prepared for evaluation on grid points: each mode of the
/// positive half-lattice is reduced mod `Q`, so `<k, x>` is an exact residue
/// and only the final `cos`/`sin` is rounded.
#[derive(Clone, Debug)]
pub struct CompiledObservable {
    field: ModQ,
    dim: usize,
    /// per component: (k mod Q, 2 Re c_k, 2 Im c_k)
    terms: Vec<Vec<(Vec<u64>, f64, f64)>>,
}

impl CompiledObservable {
    pub fn new(f: &FourierFunction, q: u64) -> Result<Self> {
        let radius = f.support_radius();
        if radius as u128 * 4 > q as u128 {
            return Err(Error::InvalidParameter(format!(
                "support radius {radius} exceeds Q/4 for Q = {q}"
            )));
        }
        let field = ModQ::new(q);
        let terms = f
            .components()
            .iter()
            .map(|comp| {
                comp.iter()
                    .filter(|(k, _)| crate::fourier::function_is_positive_half(k))
                    .map(|(k, c)| {
                        debug_assert!(sup_norm(k) <= radius);
                        let kq = k.iter().map(|&v| field.from_i128(v as i128)).collect();
                        (kq, 2.0 * c.re, 2.0 * c.im)
                    })
                    .collect()
            })
            .collect();
        Ok(CompiledObservable {
            field,
            dim: f.dim(),
            terms,
        })
    }

    pub fn components(&self) -> usize {
        self.terms.len()
    }

    #[inline]
    pub fn evaluate_into(&self, x: &[u64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        let qf = self.field.modulus() as f64;
        for (o, terms) in out.iter_mut().zip(&self.terms) {
            let mut acc = 0.0;
            for (k, re2, im2) in terms {
                let r = self.field.dot(k, x);
                let (s, c) = (TAU * (r as f64 / qf)).sin_cos();
                acc += re2 * c - im2 * s;
            }
            *o = acc;
        }
    }
}
