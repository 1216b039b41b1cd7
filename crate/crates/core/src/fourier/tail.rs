use super::family::{lacunary_levels, leonov_weight, Family};
use super::function::{CoeffMap, FourierFunction};
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, NeumaierSum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// `|k| = max_i |k_i|`
pub fn sup_norm(k: &[i64]) -> i64 {
    k.iter().map(|v| v.abs()).max().unwrap_or(0)
}

/// A tail sum together with a certified bound on its truncation error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailValue {
    pub value: f64,
    pub remainder_bound: f64,
}

/// `sum_{|k| >= b} |c_k|^exponent` for component 0.
pub fn tail_sum(f: &FourierFunction, exponent: f64, b: &BigUint) -> Result<f64> {
    tail_sum_certified(f, exponent, b).map(|t| t.value)
}

pub fn tail_sum_certified(f: &FourierFunction, exponent: f64, b: &BigUint) -> Result<TailValue> {
    match f.family() {
        Some(Family::Lacunary { gamma, q, .. }) => {
            let s = gamma * exponent / q;
            if !(s > 1.0) {
                return Err(Error::UnsupportedTail(exponent));
            }
            // |k| = 2^l >= b  <=>  l >= ceil(log2 b)
            let r = ceil_log2(b).max(1);
            let (v, err) = zeta_tail(s, r);
            Ok(TailValue {
                value: 2.0 * v,
                remainder_bound: 2.0 * err,
            })
        }
        _ => Ok(TailValue {
            value: finite_tail(f.component(0), exponent, b),
            remainder_bound: 0.0,
        }),
    }
}

fn finite_tail(map: &CoeffMap, exponent: f64, b: &BigUint) -> f64 {
    let b = b.to_i64().unwrap_or(i64::MAX);
    let mut acc = NeumaierSum::default();
    for (k, c) in map {
        if sup_norm(k) >= b {
            acc.add(c.norm().powf(exponent));
        }
    }
    acc.total()
}

fn ceil_log2(b: &BigUint) -> u64 {
    if b <= &BigUint::from(1u32) {
        return 0;
    }
    (b - 1u32).bits()
}

fn ln_big(b: &BigUint) -> f64 {
    let bits = b.bits();
    if bits <= 1000 {
        return b.to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    (b >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `sum_{l >= r} l^{-s}` with an Euler-Maclaurin tail and a certified bound
/// on the omitted correction (the first neglected term; `x^{-s}` is
/// completely monotone).
pub(crate) fn zeta_tail(s: f64, r: u64) -> (f64, f64) {
    let start = r.max(1);
    let cut = start.max(100);
    let mut acc = NeumaierSum::default();
    for l in start..cut {
        acc.add((l as f64).powf(-s));
    }
    let l = cut as f64;
    let p = |k: i32| l.powf(-s - k as f64);
    let integral = l.powf(1.0 - s) / (s - 1.0);
    let t0 = 0.5 * p(0);
    let t1 = s / 12.0 * p(1);
    let t2 = -s * (s + 1.0) * (s + 2.0) / 720.0 * p(3);
    let t3 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * p(5);
    let next = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * (s + 5.0) * (s + 6.0) / 1209600.0 * p(7);
    for t in [integral, t0, t1, t2, t3] {
        acc.add(t);
    }
    let value = acc.total();
    (value, next.abs() + 4.0 * f64::EPSILON * value)
}

impl Family {
    /// Upper bound on `sum_{|k| > radius} |c_k|^exponent` for the part of the
    /// product family cut away by truncation, by comparison of the
    /// one-dimensional factor sums with their integrals.
    pub fn omitted_tail_bound(&self, exponent: f64) -> Option<f64> {
        let Family::Leonov {
            dim,
            a,
            alpha,
            q,
            radius,
        } = *self
        else {
            return None;
        };
        let t = exponent / q;
        let w = |j: i64| leonov_weight(1.0, alpha, &[j]).powf(t);
        let inner: f64 = w(0) + 2.0 * (1..=radius).map(w).sum::<f64>();
        let x = (1 + radius) as f64;
        // integral_{radius}^inf w(x) dx, with w(x) <= ((1+x) log^{1+alpha}(1+x))^{-t}
        let outer_one_side = if (t - 1.0).abs() < 1e-15 {
            x.ln().powf(-alpha) / alpha
        } else if t > 1.0 {
            x.ln().powf(-t * (1.0 + alpha)) * x.powf(1.0 - t) / (t - 1.0)
        } else {
            return Some(f64::INFINITY);
        };
        let total = inner + 2.0 * outer_one_side;
        Some(a.powf(t) * (total.powi(dim as i32) - inner.powi(dim as i32)))
    }
}

/// `f_m = sum_{|k| <= m} c_k e(<k, .>)`
pub fn truncate(f: &FourierFunction, m: u64) -> FourierFunction {
    let m_i = i64::try_from(m).unwrap_or(i64::MAX);
    let comps: Vec<CoeffMap> = match f.family() {
        Some(Family::Lacunary { dim, gamma, q, .. }) => {
            let top = if m < 2 { 0 } else { (63 - m.leading_zeros()).min(62) };
            vec![lacunary_levels(*dim, *gamma, *q, 1..=top)]
        }
        _ => f
            .components()
            .iter()
            .map(|c| {
                c.iter()
                    .filter(|(k, _)| sup_norm(k) <= m_i)
                    .map(|(k, v)| (k.clone(), *v))
                    .collect()
            })
            .collect(),
    };
    if f.family().is_some_and(Family::is_finite) && comps.as_slice() == f.components() {
        return f.clone();
    }
    FourierFunction::vector(f.dim(), comps).expect("truncation keeps symmetry and centering")
}

/// Truncation level for the `l`-th block: `1` for `l = 1`, otherwise
/// `[2^{alpha j}]` where `2^j < l <= 2^{j+1}`.
pub fn block_index(l: u64, alpha: f64) -> u64 {
    assert!(l >= 1, "block index is defined for l >= 1");
    if l == 1 {
        return 1;
    }
    let j = 63 - (l - 1).leading_zeros();
    let v = (alpha * j as f64).exp2().floor();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum TailShape {
    /// `R log^{-theta}(b)`, theta > 1
    LogPower { theta: f64 },
    /// `R b^{-zeta}`, zeta > 0
    Polynomial { zeta: f64 },
    /// coefficient-wise `|c_k|^q <= A prod_i 1/((1+|k_i|) log^{1+alpha}(2+|k_i|))`, alpha > 1
    LeonovProduct { a: f64, alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailConditionSpec {
    /// Power of `|c_k|` that is summed: `q` or `2`.
    pub exponent_q: f64,
    pub shape: TailShape,
    pub constant_r: f64,
    pub p: Option<f64>,
}

impl TailConditionSpec {
    pub fn new(exponent_q: f64, shape: TailShape, constant_r: f64, p: Option<f64>) -> Result<Self> {
        let spec = TailConditionSpec {
            exponent_q,
            shape,
            constant_r,
            p,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self.shape {
            TailShape::LogPower { theta } if !(theta > 1.0) => return bad(format!("theta must exceed 1, got {theta}")),
            TailShape::Polynomial { zeta } if !(zeta > 0.0) => {
                return bad(format!("zeta must be positive, got {zeta}"))
            }
            TailShape::LeonovProduct { alpha, a } if !(alpha > 1.0 && a > 0.0) => {
                return bad(format!(
                    "product shape needs alpha > 1 and A > 0, got alpha = {alpha}, A = {a}"
                ))
            }
            _ => {}
        }
        if !(self.exponent_q > 1.0 && self.exponent_q <= 2.0) {
            return bad(format!("summed exponent must lie in (1, 2], got {}", self.exponent_q));
        }
        if !(self.constant_r > 0.0) {
            return bad(format!("R must be positive, got {}", self.constant_r));
        }
        if let Some(p) = self.p {
            if !(p > 2.0 && p <= 4.0) {
                return bad(format!("p must lie in (2, 4], got {p}"));
            }
            let q = p / (p - 1.0);
            if (self.exponent_q - 2.0).abs() > 1e-12 && (self.exponent_q - q).abs() > 1e-12 {
                return bad(format!("exponent {} is neither 2 nor p/(p-1) = {q}", self.exponent_q));
            }
        }
        Ok(())
    }

    /// Profile of the bound without the constant, for `b >= 2`.
    fn profile(&self, ln_b: f64) -> f64 {
        match self.shape {
            TailShape::LogPower { theta } => ln_b.powf(-theta),
            TailShape::Polynomial { zeta } => (-zeta * ln_b).exp(),
            TailShape::LeonovProduct { .. } => f64::NAN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub b: Vec<String>,
    pub tails: Vec<f64>,
    pub bounds: Vec<f64>,
    pub holds: Vec<bool>,
    /// Least-squares slope of `log tail` against `log log b` (log-power and
    /// product shapes) or `log b` (polynomial shape).
    pub fitted_exponent: Option<f64>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

pub fn verify_condition(f: &FourierFunction, spec: &TailConditionSpec, b_grid: &[BigUint]) -> Result<ConditionReport> {
    spec.validate()?;
    if b_grid.is_empty() {
        return Err(Error::InvalidParameter("empty b grid".into()));
    }
    if b_grid[0] < BigUint::from(2u32) || b_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "b grid must be strictly increasing with minimum >= 2".into(),
        ));
    }
    let mut report = ConditionReport {
        b: b_grid.iter().map(|b| b.to_string()).collect(),
        tails: Vec::new(),
        bounds: Vec::new(),
        holds: Vec::new(),
        fitted_exponent: None,
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for b in b_grid {
        let tail = tail_sum(f, spec.exponent_q, b)?;
        let ln_b = ln_big(b);
        let (bound, holds) = match spec.shape {
            TailShape::LeonovProduct { a, alpha } => {
                let b_i = b.to_i64().unwrap_or(i64::MAX);
                let worst = f
                    .component(0)
                    .iter()
                    .filter(|(k, _)| sup_norm(k) >= b_i)
                    .map(|(k, c)| c.norm().powf(spec.exponent_q) / leonov_weight(a, alpha, k))
                    .fold(0.0, f64::max);
                (worst, worst <= 1.0 + 1e-12)
            }
            _ => {
                let bound = spec.constant_r * spec.profile(ln_b);
                (bound, tail <= bound * (1.0 + 1e-12))
            }
        };
        report.tails.push(tail);
        report.bounds.push(bound);
        report.holds.push(holds);
        if tail > 0.0 {
            ys.push(tail.ln());
            xs.push(match spec.shape {
                TailShape::Polynomial { .. } => ln_b,
                _ => ln_b.ln(),
            });
        }
    }
    if xs.len() >= 2 {
        report.fitted_exponent = linear_fit(&xs, &ys).map(|fit| fit.slope);
    }
    Ok(report)
}

/// Smallest `R` for which the tail condition holds at every `b` in
/// `2..=b_max` (the tail vanishes past the support for finite functions).
pub fn fit_constant(f: &FourierFunction, spec: &TailConditionSpec, b_max: u64) -> Result<f64> {
    let mut r: f64 = 0.0;
    for b in 2..=b_max {
        let b_big = BigUint::from(b);
        let tail = tail_sum(f, spec.exponent_q, &b_big)?;
        let prof = spec.profile((b as f64).ln());
        if prof.is_nan() {
            return Err(Error::InvalidParameter(
                "the product shape is coefficient-wise and has no tail constant".into(),
            ));
        }
        r = r.max(tail / prof);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{lacunary, leonov};

    fn big(b: u64) -> BigUint {
        BigUint::from(b)
    }

    #[test]
    fn tail_of_small_support_is_empty() {
        let f = FourierFunction::cosine_pair(&[1, 2], 0.5).unwrap();
        assert_eq!(tail_sum(&f, 2.0, &big(3)).unwrap(), 0.0);
    }

    #[test]
    fn single_pair_full_tail() {
        let f = FourierFunction::cosine_pair(&[1, 0], 0.5).unwrap();
        assert_eq!(tail_sum(&f, 2.0, &big(1)).unwrap(), 0.5);
    }

    #[test]
    fn lacunary_tail_is_twice_zeta_tail() {
        let (gamma, q) = (2.0, 1.5);
        let f = lacunary(2, gamma, q, 20).unwrap();
        // 2^{r-1} < b <= 2^r
        for (b, r) in [(2u64, 1u64), (3, 2), (4, 2), (5, 3), (1000, 10), (1024, 10), (1025, 11)] {
            let direct: f64 = 2.0 * (r..2_000_000).map(|l| (l as f64).powf(-gamma)).sum::<f64>()
                + 2.0 * (2_000_000f64).powf(1.0 - gamma) / (gamma - 1.0);
            let got = tail_sum_certified(&f, q, &big(b)).unwrap();
            assert!((got.value - direct).abs() < 1e-9 * direct, "b={b}");
            assert!(got.remainder_bound < 1e-14 * got.value);
        }
    }

    #[test]
    fn lacunary_tail_matches_materialized_levels() {
        // q-tail of the first 30 levels equals the closed form minus levels > 30
        let (gamma, q) = (3.0, 4.0 / 3.0);
        let f = lacunary(1, gamma, q, 30).unwrap();
        let finite = truncate(&f, 1 << 30);
        let b = big(64);
        let closed = tail_sum(&f, q, &b).unwrap() - tail_sum(&f, q, &big((1 << 30) + 1)).unwrap();
        let direct = tail_sum(&finite, q, &b).unwrap();
        assert!((closed - direct).abs() < 1e-13);
    }

    #[test]
    fn divergent_exponent_is_unsupported() {
        let f = lacunary(2, 1.2, 2.0, 5).unwrap();
        assert!(matches!(tail_sum(&f, 1.5, &big(4)), Err(Error::UnsupportedTail(_))));
    }

    #[test]
    fn truncation_and_parseval() {
        let f = FourierFunction::cosine_modes(2, &[(vec![1, 0], 0.5), (vec![3, 1], 0.25), (vec![0, 5], 0.1)]).unwrap();
        assert_eq!(truncate(&f, 10).components(), f.components());
        let f3 = truncate(&f, 3);
        assert_eq!(f3.component(0).len(), 4);
        let diff: f64 = f.l2_norm_sq() - f3.l2_norm_sq();
        assert!((diff - tail_sum(&f, 2.0, &big(4)).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn block_index_examples() {
        assert_eq!(block_index(1, 3.7), 1);
        assert_eq!(block_index(3, 2.0), 4);
        assert_eq!(block_index(2, 2.0), 1);
        for j in 0..=20u32 {
            let lo = (1u64 << j) + 1;
            let hi = 1u64 << (j + 1);
            assert_eq!(block_index(lo, 1.5), block_index(hi, 1.5), "j={j}");
        }
    }

    #[test]
    fn condition_spec_domains() {
        assert!(TailConditionSpec::new(1.5, TailShape::LogPower { theta: 1.0 }, 1.0, None).is_err());
        assert!(TailConditionSpec::new(2.0, TailShape::Polynomial { zeta: 0.0 }, 1.0, None).is_err());
        assert!(TailConditionSpec::new(1.5, TailShape::LogPower { theta: 2.0 }, 1.0, Some(4.0)).is_err());
        assert!(TailConditionSpec::new(4.0 / 3.0, TailShape::LogPower { theta: 2.0 }, 1.0, Some(4.0)).is_ok());
        assert!(TailConditionSpec::new(2.0, TailShape::Polynomial { zeta: 0.3 }, 1.0, Some(3.0)).is_ok());
    }

    #[test]
    fn verify_rejects_bad_grids() {
        let f = FourierFunction::cosine_pair(&[1, 0], 1.0).unwrap();
        let spec = TailConditionSpec::new(2.0, TailShape::Polynomial { zeta: 1.0 }, 1.0, None).unwrap();
        assert!(verify_condition(&f, &spec, &[]).is_err());
        assert!(verify_condition(&f, &spec, &[big(1), big(4)]).is_err());
        assert!(verify_condition(&f, &spec, &[big(4), big(4)]).is_err());
    }

    #[test]
    fn leonov_satisfies_its_own_product_bound() {
        let f = leonov(2, 2.0, 1.5, 1.5, 6).unwrap();
        let spec = TailConditionSpec::new(1.5, TailShape::LeonovProduct { a: 2.0, alpha: 1.5 }, 1.0, None).unwrap();
        let rep = verify_condition(&f, &spec, &[big(2), big(3), big(5)]).unwrap();
        assert!(rep.all_hold());
        let tighter = TailConditionSpec::new(1.5, TailShape::LeonovProduct { a: 1.0, alpha: 1.5 }, 1.0, None).unwrap();
        assert!(!verify_condition(&f, &tighter, &[big(2)]).unwrap().all_hold());
    }

    #[test]
    fn leonov_omitted_bound_dominates_larger_truncation() {
        let (a, alpha, q) = (1.0, 1.5, 4.0 / 3.0);
        let small = leonov(2, a, alpha, q, 5).unwrap();
        let large = leonov(2, a, alpha, q, 60).unwrap();
        for e in [q, 2.0] {
            let bound = small.family().unwrap().omitted_tail_bound(e).unwrap();
            let seen = tail_sum(&large, e, &big(6)).unwrap();
            assert!(seen <= bound, "exponent {e}: {seen} > {bound}");
        }
    }
}
