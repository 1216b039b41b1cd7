use super::matrix::AutoMatrix;
use super::poly::{euler_phi, CyclotomicCache, IntPoly};
use super::roots::certified_roots;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Radius below which a root disk touching the unit circle is accepted as
/// a unit-modulus eigenvalue.
pub const UNIT_CIRCLE_RADIUS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub ergodic: bool,
    pub hyperbolic: bool,
    /// Order `m` of the smallest cyclotomic polynomial dividing the
    /// characteristic polynomial.
    pub cyclotomic_witness: Option<u64>,
    /// An eigenvalue (re, im) of modulus one, when one exists.
    pub unit_circle_witness: Option<(f64, f64)>,
}

/// Decide ergodicity exactly and hyperbolicity with certified root disks.
pub fn classify(s: &AutoMatrix) -> Result<Classification> {
    let chi = s.charpoly();
    if let Some(m) = cyclotomic_factor(chi, s.dim()) {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / m as f64);
        return Ok(Classification {
            ergodic: false,
            hyperbolic: false,
            cyclotomic_witness: Some(m),
            unit_circle_witness: Some((w.re, w.im)),
        });
    }
    let witness = unit_circle_root(chi)?;
    Ok(Classification {
        ergodic: true,
        hyperbolic: witness.is_none(),
        cyclotomic_witness: None,
        unit_circle_witness: witness.map(|z| (z.re, z.im)),
    })
}

/// Smallest `m` with `Phi_m | chi`, searching every `m` with `phi(m) <= d`.
/// Since `phi(m) >= sqrt(m / 2)`, all such `m` satisfy `m <= 2 d^2`.
pub fn cyclotomic_factor(chi: &IntPoly, d: usize) -> Option<u64> {
    let mut cache = CyclotomicCache::new();
    let bound = 2 * (d as u64) * (d as u64);
    (1..=bound.max(2))
        .filter(|&m| euler_phi(m) <= d as u64)
        .find(|&m| chi.divisible_by(&cache.get(m)))
}

/// Finds an eigenvalue on the unit circle, if any. Such a root `z` has
/// `1/z = conj(z)` also a root, so it divides `gcd(chi, reciprocal(chi))`;
/// only that factor is examined numerically.
pub fn unit_circle_root(chi: &IntPoly) -> Result<Option<Complex64>> {
    let g = chi.gcd(&chi.reciprocal());
    if g.degree().unwrap_or(0) == 0 {
        return Ok(None);
    }
    let g = g.squarefree();
    let (coeffs, exact) = g.to_f64();
    let rel = if exact { 0.0 } else { f64::EPSILON };
    let disks = certified_roots(&coeffs, rel);
    for disk in &disks {
        // modulus bounds over the whole cluster the disk belongs to
        let (lo, hi) = disks
            .iter()
            .filter(|o| o.cluster == disk.cluster)
            .map(|o| o.modulus_interval())
            .fold((f64::INFINITY, 0.0f64), |(a, b), (l, h)| (a.min(l), b.max(h)));
        if lo > 1.0 || hi < 1.0 {
            continue;
        }
        let cluster_size = disks.iter().filter(|o| o.cluster == disk.cluster).count();
        if cluster_size == 1 && disk.radius < UNIT_CIRCLE_RADIUS {
            return Ok(Some(disk.center));
        }
        return Err(Error::UndecidedHyperbolicity {
            root: format!("{}", disk.center),
            radius: disk.radius,
        });
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> AutoMatrix {
        AutoMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_is_not_ergodic() {
        let c = classify(&AutoMatrix::identity(2)).unwrap();
        assert!(!c.ergodic && !c.hyperbolic);
        assert_eq!(c.cyclotomic_witness, Some(1));
    }

    #[test]
    fn cat_map_and_fibonacci() {
        for s in [m(&[vec![2, 1], vec![1, 1]]), m(&[vec![0, 1], vec![1, 1]])] {
            let c = classify(&s).unwrap();
            assert!(c.ergodic && c.hyperbolic, "{c:?}");
            assert_eq!(c.cyclotomic_witness, None);
            assert_eq!(c.unit_circle_witness, None);
        }
    }

    #[test]
    fn cat_map_fails_every_small_cyclotomic_division() {
        let chi = IntPoly::from_i64(&[1, -3, 1]);
        let mut cache = CyclotomicCache::new();
        for k in [1, 2, 3, 4, 6] {
            assert!(!chi.divisible_by(&cache.get(k)));
        }
    }

    #[test]
    fn salem_quartic_is_ergodic_but_not_hyperbolic() {
        let s = AutoMatrix::companion(&[1, -1, -1, -1, 1]).unwrap();
        let c = classify(&s).unwrap();
        assert!(c.ergodic);
        assert!(!c.hyperbolic);
        let (re, im) = c.unit_circle_witness.unwrap();
        assert!(((re * re + im * im).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_block_gives_witness_four() {
        let cat = m(&[vec![2, 1], vec![1, 1]]);
        let rot = AutoMatrix::companion(&[1, 0, 1]).unwrap();
        let c = classify(&AutoMatrix::block_diag(&cat, &rot)).unwrap();
        assert!(!c.ergodic);
        assert_eq!(c.cyclotomic_witness, Some(4));
    }

    #[test]
    fn permutation_matrices_are_not_ergodic() {
        let p = m(&[vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]]);
        assert_eq!(classify(&p).unwrap().cyclotomic_witness, Some(1));
    }

    #[test]
    fn hyperbolic_3d() {
        // x^3 - x - 1 (plastic number), irreducible with no unit-modulus roots
        let s = AutoMatrix::companion(&[-1, -1, 0, 1]).unwrap();
        let c = classify(&s).unwrap();
        assert!(c.ergodic && c.hyperbolic);
    }
}
