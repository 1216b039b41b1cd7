//! Simultaneous root finding with a posteriori inclusion disks.
//!
//! Roots are located with the Aberth-Ehrlich iteration. Each approximation
//! `z_i` gets the radius `r_i = n |p(z_i)| / (|a_n| prod_{j != i} |z_i - z_j|)`
//! (plus a bound on the rounding error of evaluating `p`); the union of the
//! disks contains every root and each connected component of `k` disks
//! contains exactly `k` roots.

use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct RootDisk {
    pub center: Complex64,
    pub radius: f64,
    /// Index of the connected component of overlapping disks.
    pub cluster: usize,
}

impl RootDisk {
    /// Certified bounds on the modulus of the root(s) in this disk.
    pub fn modulus_interval(&self) -> (f64, f64) {
        let m = self.center.norm();
        ((m - self.radius).max(0.0), m + self.radius)
    }
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Running error bound for Horner evaluation: `gamma * sum |a_k| |z|^k`.
fn horner_error(coeffs: &[f64], z: Complex64, coeff_rel_err: f64) -> f64 {
    let n = coeffs.len() as f64;
    let r = z.norm();
    let abs_sum = coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.abs());
    let u = f64::EPSILON / 2.0;
    let gamma = (4.0 * n + 2.0) * u / (1.0 - (4.0 * n + 2.0) * u);
    (gamma + coeff_rel_err) * abs_sum
}

/// Roots of a polynomial given low-to-high with inclusion radii. The
/// polynomial must have nonzero leading coefficient; multiple roots give
/// overlapping disks rather than failure.
pub fn certified_roots(coeffs: &[f64], coeff_rel_err: f64) -> Vec<RootDisk> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    // Cauchy bound for initial circle.
    let bound = 1.0 + coeffs[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(0.5 * bound, angle)
        })
        .collect();
    for _ in 0..1000 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-17 {
            break;
        }
    }
    let radii: Vec<f64> = (0..n)
        .map(|i| {
            let (p, _) = horner(coeffs, z[i]);
            let pval = p.norm() + horner_error(coeffs, z[i], coeff_rel_err);
            let denom: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).norm())
                .product::<f64>()
                * lead.abs();
            if denom == 0.0 {
                f64::INFINITY
            } else {
                n as f64 * pval / denom
            }
        })
        .collect();
    // union-find of overlapping disks
    let mut cluster: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while c[r] != r {
            r = c[r];
        }
        c[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() <= radii[i] + radii[j] {
                let (a, b) = (find(&mut cluster, i), find(&mut cluster, j));
                cluster[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n)
        .map(|i| RootDisk {
            center: z[i],
            radius: radii[i],
            cluster: find(&mut cluster, i),
        })
        .collect()
}
