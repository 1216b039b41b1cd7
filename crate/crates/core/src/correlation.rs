//! Exact correlations `E(f · g∘T^n)` through the dual lattice action, the
//! long-run variance (matrix) and the finite-n variance profile.

use crate::error::{Error, Result};
use crate::fourier::{tail_sum, FourierFunction, Lattice};
use crate::numeric::NeumaierSum;
use crate::torus::{classify, dual_iterate_i64, AutoMatrix, BigVec};
use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Largest acceptable Cauchy-Schwarz certificate for omitted coefficients.
pub const CORRELATION_TAIL_TOL: f64 = 1e-12;
/// Scan horizon for ergodic automorphisms that are not hyperbolic.
pub const DEFAULT_HORIZON: i64 = 1000;
/// Number of consecutive growth steps required by the hyperbolic stopping rule.
const GROWTH_STEPS: usize = 3;

type Matrix = Vec<Vec<f64>>;

/// `E(f · g∘T^n)` for scalar observables (component 0 of each).
pub fn correlation(f: &FourierFunction, g: &FourierFunction, s: &AutoMatrix, n: i64) -> Result<f64> {
    for h in [f, g] {
        if h.dim() != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                got: h.dim(),
            });
        }
    }
    let cert = tail_certificate(f, g)?;
    if cert > CORRELATION_TAIL_TOL {
        return Err(Error::InvalidParameter(format!(
            "omitted coefficients contribute up to {cert:e}; truncate the observable first"
        )));
    }
    let mut acc = NeumaierSum::default();
    for (k, gk) in g.component(0) {
        let img = dual_iterate_i64(s, k, n);
        if let Some(key) = to_lattice(&img) {
            if let Some(fk) = f.component(0).get(&key) {
                acc.add((fk * gk.conj()).re);
            }
        }
    }
    Ok(acc.total())
}

/// `||f - f_M|| ||g|| + ||f_M|| ||g - g_M||` where `f_M`, `g_M` are the
/// materialized parts. Zero for finite observables.
fn tail_certificate(f: &FourierFunction, g: &FourierFunction) -> Result<f64> {
    let omitted = |h: &FourierFunction| -> Result<f64> {
        match h.family() {
            Some(fam) if !fam.is_finite() => {
                let b = BigUint::from(h.support_radius() as u64 + 1);
                tail_sum(h, 2.0, &b)
            }
            _ => Ok(0.0),
        }
    };
    let (tf, tg) = (omitted(f)?, omitted(g)?);
    let (nf, ng) = (f.l2_norm_sq(), g.l2_norm_sq());
    Ok(tf.sqrt() * (ng + tg).sqrt() + nf.sqrt() * tg.sqrt())
}

fn to_lattice(v: &BigVec) -> Option<Lattice> {
    v.iter().map(|x| x.to_i64()).collect()
}

fn big_sup_norm_exceeds(v: &BigVec, radius: i64) -> bool {
    v.iter().any(|x| x.abs() > radius.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub components: usize,
    /// `values[n] = Cov(f, f∘T^n)` for `n = 0..values.len()`; negative lags
    /// are the transposes.
    pub values: Vec<Matrix>,
    /// First `n` from which every correlation vanishes exactly.
    pub termination_n0: Option<i64>,
    /// True when the stopping rule proves the vanishing (hyperbolic case).
    pub certified: bool,
    pub horizon_limited: bool,
    pub horizon_scanned: i64,
    pub sigma2: Option<f64>,
    #[serde(rename = "Sigma")]
    pub sigma: Matrix,
    /// `(n, Var(S_n)/n)`
    pub partial_variances: Vec<(u64, Matrix)>,
}

impl CorrelationReport {
    /// Correlation matrix at a signed lag.
    pub fn at(&self, n: i64) -> Matrix {
        let m = self.components;
        match self.values.get(n.unsigned_abs() as usize) {
            None => vec![vec![0.0; m]; m],
            Some(v) if n >= 0 => v.clone(),
            Some(v) => transpose(v),
        }
    }

    pub fn scalar_at(&self, n: i64) -> f64 {
        self.at(n)[0][0]
    }

    /// `Var(S_n)/n = sum_{|k|<n} (1 - |k|/n) Cov(f, f∘T^k)`.
    pub fn variance_profile(&self, n: u64) -> Matrix {
        let m = self.components;
        let mut acc = vec![vec![NeumaierSum::default(); m]; m];
        let nf = n as f64;
        for (k, c) in self.values.iter().enumerate().take(n as usize) {
            let w = 1.0 - k as f64 / nf;
            for i in 0..m {
                for j in 0..m {
                    if k == 0 {
                        acc[i][j].add(c[i][j]);
                    } else {
                        acc[i][j].add(w * (c[i][j] + c[j][i]));
                    }
                }
            }
        }
        acc.iter().map(|r| r.iter().map(NeumaierSum::total).collect()).collect()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().flatten().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Plot-ready CSV: `n,value` for scalar observables, `n,i,j,value` otherwise.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let h = self.values.len() as i64 - 1;
        if self.components == 1 {
            out.push_str("n,value\n");
            for n in -h..=h {
                let _ = writeln!(out, "{n},{}", self.scalar_at(n));
            }
        } else {
            out.push_str("n,i,j,value\n");
            for n in -h..=h {
                let c = self.at(n);
                for (i, row) in c.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let _ = writeln!(out, "{n},{i},{j},{v}");
                    }
                }
            }
        }
        out
    }
}

fn transpose(a: &Matrix) -> Matrix {
    let m = a.len();
    (0..m).map(|i| (0..m).map(|j| a[j][i]).collect()).collect()
}

/// Options for [`variance_series_with`].
#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub horizon: i64,
    /// Profile lengths recorded in `partial_variances`.
    pub profile_max_log2: u32,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            horizon: DEFAULT_HORIZON,
            profile_max_log2: 12,
        }
    }
}

pub fn variance_series(f: &FourierFunction, s: &AutoMatrix) -> Result<CorrelationReport> {
    variance_series_with(f, s, SeriesOptions::default())
}

/// All correlations of a finite-support observable, the long-run variance
/// and the variance profile.
///
/// Hyperbolic `S`: the scan stops once the smallest sup-norm over the dual
/// images of the support exceeds the support radius and has grown for three
/// consecutive steps. Other ergodic `S`: every lag up to the horizon is
/// checked, and the report is flagged horizon-limited when overlaps persist
/// past half of it.
pub fn variance_series_with(f: &FourierFunction, s: &AutoMatrix, opts: SeriesOptions) -> Result<CorrelationReport> {
    if f.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: f.dim(),
        });
    }
    if f.family().is_some_and(|fam| !fam.is_finite()) {
        return Err(Error::InvalidParameter(
            "variance series needs a finite-support observable; truncate first".into(),
        ));
    }
    let hyperbolic = match classify(s) {
        Ok(c) if !c.ergodic => return Err(Error::NotErgodic(c.cyclotomic_witness.unwrap_or(0))),
        Ok(c) => c.hyperbolic,
        Err(Error::UndecidedHyperbolicity { .. }) => false,
        Err(e) => return Err(e),
    };
    let m = f.component_count();
    let radius = f.support_radius();
    // every mode of every component, iterated together
    let mut modes: Vec<Lattice> = f.components().iter().flat_map(|c| c.keys().cloned()).collect();
    modes.sort();
    modes.dedup();
    let mut images: Vec<BigVec> = modes.iter().map(|k| dual_iterate_i64(s, k, 0)).collect();

    let mut values: Vec<Matrix> = Vec::new();
    let mut last_overlap: i64 = -1;
    let mut prev_min: Option<num_bigint::BigInt> = None;
    let mut growth = 0usize;
    let mut certified = false;
    let mut n: i64 = 0;
    loop {
        let mut acc = vec![vec![NeumaierSum::default(); m]; m];
        let mut overlap = false;
        for (k, img) in modes.iter().zip(&images) {
            if big_sup_norm_exceeds(img, radius) {
                continue;
            }
            let key = to_lattice(img).expect("within radius");
            for (j, comp_j) in f.components().iter().enumerate() {
                let Some(gk) = comp_j.get(k) else { continue };
                for (i, comp_i) in f.components().iter().enumerate() {
                    if let Some(fk) = comp_i.get(&key) {
                        overlap = true;
                        acc[i][j].add((fk * gk.conj()).re);
                    }
                }
            }
        }
        values.push(acc.iter().map(|r| r.iter().map(NeumaierSum::total).collect()).collect());
        if overlap {
            last_overlap = n;
        }
        if modes.is_empty() {
            certified = true;
            break;
        }
        if hyperbolic {
            let min_norm = images
                .iter()
                .map(|v| v.iter().map(|x| x.abs()).max().unwrap())
                .min()
                .unwrap();
            let grew = prev_min.as_ref().is_some_and(|p| &min_norm > p);
            growth = if grew { growth + 1 } else { 0 };
            let beyond = min_norm > radius.into();
            prev_min = Some(min_norm);
            if beyond && growth >= GROWTH_STEPS {
                certified = true;
                break;
            }
        }
        if n >= opts.horizon {
            break;
        }
        n += 1;
        for img in images.iter_mut() {
            *img = s.apply_transpose(img);
        }
    }
    let horizon_limited = !certified && last_overlap > opts.horizon / 2;
    values.truncate((last_overlap + 1).max(1) as usize);
    let termination_n0 = (!horizon_limited).then_some(last_overlap + 1);

    let mut report = CorrelationReport {
        components: m,
        values,
        termination_n0,
        certified,
        horizon_limited,
        horizon_scanned: n,
        sigma2: None,
        sigma: Vec::new(),
        partial_variances: Vec::new(),
    };
    let mut sigma = vec![vec![NeumaierSum::default(); m]; m];
    for (k, c) in report.values.iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                sigma[i][j].add(if k == 0 { c[i][j] } else { c[i][j] + c[j][i] });
            }
        }
    }
    report.sigma = sigma
        .iter()
        .map(|r| r.iter().map(NeumaierSum::total).collect())
        .collect();
    if m == 1 {
        report.sigma2 = Some(report.sigma[0][0]);
    }
    let mut ns: Vec<u64> = (1..=16).collect();
    ns.extend((5..=opts.profile_max_log2).map(|e| 1u64 << e));
    ns.sort();
    ns.dedup();
    report.partial_variances = ns.iter().map(|&n| (n, report.variance_profile(n))).collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> AutoMatrix {
        AutoMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap()
    }

    /// (S^T)^n k by repeated i128 products, independent of the BigInt path.
    fn naive_orbit(s: [[i128; 2]; 2], k: [i128; 2], n: usize) -> Vec<[i128; 2]> {
        let mut out = vec![k];
        let mut v = k;
        for _ in 0..n {
            v = [s[0][0] * v[0] + s[1][0] * v[1], s[0][1] * v[0] + s[1][1] * v[1]];
            out.push(v);
        }
        out
    }

    #[test]
    fn lag_zero_is_parseval() {
        let f = FourierFunction::cosine_modes(2, &[(vec![1, 0], 0.5), (vec![2, 1], 0.25)]).unwrap();
        let c = correlation(&f, &f, &cat(), 0).unwrap();
        assert!((c - f.l2_norm_sq()).abs() < 1e-15);
        assert!((c - 2.0 * (0.25 + 0.0625)).abs() < 1e-15);
    }

    #[test]
    fn single_cosine_decorrelates_immediately() {
        let f = FourierFunction::cosine_pair(&[1, 0], 1.0).unwrap();
        // oracle: the dual orbit of (1,0) never meets ±(1,0) again (|n| <= 50)
        let fwd = naive_orbit([[2, 1], [1, 1]], [1, 0], 50);
        let bwd = naive_orbit([[1, -1], [-1, 2]], [1, 0], 50);
        for v in fwd.iter().skip(1).chain(bwd.iter().skip(1)) {
            assert!(*v != [1, 0] && *v != [-1, 0]);
        }
        for n in (-50..=50).filter(|&n| n != 0) {
            assert_eq!(correlation(&f, &f, &cat(), n).unwrap(), 0.0);
        }
    }

    #[test]
    fn one_step_overlap_is_positive() {
        let f = FourierFunction::cosine_modes(2, &[(vec![1, 0], 1.0), (vec![2, 1], 1.0)]).unwrap();
        // S^T(1,0) = (2,1) and S^T(-1,0) = (-2,-1) both land in the support
        assert_eq!(correlation(&f, &f, &cat(), 1).unwrap(), 2.0);
        assert_eq!(correlation(&f, &f, &cat(), -1).unwrap(), 2.0);
        assert_eq!(correlation(&f, &f, &cat(), 2).unwrap(), 0.0);
    }

    #[test]
    fn single_cosine_series() {
        let f = FourierFunction::cosine_pair(&[1, 0], 1.0).unwrap();
        let rep = variance_series(&f, &cat()).unwrap();
        assert_eq!(rep.sigma2, Some(2.0));
        assert_eq!(rep.termination_n0, Some(1));
        assert!(rep.certified && !rep.horizon_limited);
        for (_, v) in &rep.partial_variances {
            assert_eq!(v[0][0], 2.0);
        }
    }

    #[test]
    fn three_mode_chain() {
        // (1,0) -> (2,1) -> (5,3) under S^T
        let f = FourierFunction::cosine_modes(2, &[(vec![1, 0], 1.0), (vec![2, 1], 0.5), (vec![5, 3], 0.25)]).unwrap();
        let rep = variance_series(&f, &cat()).unwrap();
        assert_eq!(rep.termination_n0, Some(3));
        // lag 1: 2 * (1*0.5 + 0.5*0.25); lag 2: 2 * (1*0.25)
        assert!((rep.scalar_at(1) - 1.25).abs() < 1e-15);
        assert!((rep.scalar_at(2) - 0.5).abs() < 1e-15);
        assert!((rep.scalar_at(-2) - 0.5).abs() < 1e-15);
        let var0 = 2.0 * (1.0 + 0.25 + 0.0625);
        assert!((rep.sigma2.unwrap() - (var0 + 2.0 * 1.25 + 2.0 * 0.5)).abs() < 1e-14);
    }

    #[test]
    fn profile_matches_direct_double_sum() {
        let f = FourierFunction::cosine_modes(
            2,
            &[
                (vec![1, 0], 1.0),
                (vec![2, 1], -0.5),
                (vec![5, 3], 0.25),
                (vec![0, 1], 0.3),
            ],
        )
        .unwrap();
        let rep = variance_series(&f, &cat()).unwrap();
        let n0 = rep.termination_n0.unwrap();
        let sigma2 = rep.sigma2.unwrap();
        for n in [1u64, 2, 3, 5, 8, 13, 64, 100] {
            let mut direct = 0.0;
            for i in 0..n as i64 {
                for j in 0..n as i64 {
                    direct += rep.scalar_at(j - i);
                }
            }
            direct /= n as f64;
            let prof = rep.variance_profile(n)[0][0];
            assert!((prof - direct).abs() < 1e-12, "n={n}");
            let bound = 2.0 * n0 as f64 * rep.max_abs_value() * (n0 as f64 / n as f64);
            assert!((prof - sigma2).abs() <= bound);
        }
    }

    #[test]
    fn disjoint_orbits_give_diagonal_sigma() {
        let f1 = FourierFunction::cosine_pair(&[1, 0], 1.0).unwrap();
        let f2 = FourierFunction::cosine_pair(&[0, 1], 1.0).unwrap();
        // oracle: (S^T)^n (1,0) never equals ±(0,1) for |n| <= 50
        let fwd = naive_orbit([[2, 1], [1, 1]], [1, 0], 50);
        let bwd = naive_orbit([[1, -1], [-1, 2]], [1, 0], 50);
        assert!(fwd.iter().chain(&bwd).all(|v| *v != [0, 1] && *v != [0, -1]));
        let f = FourierFunction::stack(&[f1, f2]).unwrap();
        let rep = variance_series(&f, &cat()).unwrap();
        assert_eq!(rep.sigma, vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
    }

    #[test]
    fn refuses_non_ergodic() {
        let f = FourierFunction::cosine_pair(&[1, 0], 1.0).unwrap();
        assert!(matches!(
            variance_series(&f, &AutoMatrix::identity(2)),
            Err(Error::NotErgodic(1))
        ));
    }

    #[test]
    fn conjugation_leaves_correlations_unchanged() {
        let f = FourierFunction::cosine_modes(2, &[(vec![1, 0], 1.0), (vec![2, 1], 0.5), (vec![1, 1], 0.2)]).unwrap();
        let u = AutoMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        let s2 = cat().conjugate_by(&u);
        let g = f.compose_linear(&u).unwrap();
        for n in -6..=6 {
            let a = correlation(&f, &f, &cat(), n).unwrap();
            let b = correlation(&g, &g, &s2, n).unwrap();
            assert!((a - b).abs() < 1e-14, "n={n}");
        }
        let (ra, rb) = (variance_series(&f, &cat()).unwrap(), variance_series(&g, &s2).unwrap());
        assert!((ra.sigma2.unwrap() - rb.sigma2.unwrap()).abs() < 1e-13);
    }

    #[test]
    fn non_hyperbolic_ergodic_scan() {
        let s = AutoMatrix::companion(&[1, -1, -1, -1, 1]).unwrap();
        let f = FourierFunction::cosine_pair(&[1, 0, 0, 0], 1.0).unwrap();
        let rep = variance_series_with(
            &f,
            &s,
            SeriesOptions {
                horizon: 200,
                profile_max_log2: 8,
            },
        )
        .unwrap();
        assert!(!rep.certified);
        assert_eq!(rep.horizon_scanned, 200);
        assert!(rep.sigma2.unwrap() >= 0.0);
    }

    #[test]
    fn lacunary_needs_truncation() {
        let f = crate::fourier::lacunary(2, 2.0, 1.5, 4).unwrap();
        assert!(correlation(&f, &f, &cat(), 1).is_err());
        let ft = crate::fourier::truncate(&f, 16);
        assert!(correlation(&ft, &ft, &cat(), 1).is_ok());
    }

    #[test]
    fn csv_has_two_columns_for_scalars() {
        let f = FourierFunction::cosine_modes(2, &[(vec![1, 0], 1.0), (vec![2, 1], 1.0)]).unwrap();
        let csv = variance_series(&f, &cat()).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,value");
        assert_eq!(lines[1], "-1,2");
        assert_eq!(lines.len(), 4);
    }
}
