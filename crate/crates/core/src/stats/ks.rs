//! Kolmogorov-Smirnov statistics and the reference laws used by the battery.

use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Number of terms of the Kolmogorov series.
pub const KOLMOGOROV_TERMS: usize = 100;

/// `P(K > lambda)` for the limiting Kolmogorov distribution,
/// `2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    // the alternating series is useless near 0, where the survival is 1 to
    // double precision anyway
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=KOLMOGOROV_TERMS {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as usize % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub distance: f64,
    pub p_value: f64,
}

/// One-sample KS test of `samples` against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    KsResult {
        distance: d,
        p_value: kolmogorov_sf(m.sqrt() * d),
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    KsResult {
        distance: d,
        p_value: kolmogorov_sf(ne.sqrt() * d),
    }
}

pub fn normal_cdf(x: f64, sigma: f64) -> f64 {
    0.5 * erfc(-x / sigma * FRAC_1_SQRT_2)
}

/// CDF of `sigma * max_{t<=1} W(t)`.
pub fn reflected_max_cdf(x: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        2.0 * normal_cdf(x, sigma) - 1.0
    }
}

/// CDF of the arcsine law on [0, 1].
pub fn arcsine_cdf(u: f64) -> f64 {
    2.0 / PI * u.clamp(0.0, 1.0).sqrt().asin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_known_values() {
        // classical critical values
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(10.0) < 1e-80);
    }

    #[test]
    fn reference_laws() {
        assert!((reflected_max_cdf(1.2, 1.0) - 0.769_86).abs() < 1e-4);
        assert!((reflected_max_cdf(2.4, 2.0) - 0.769_86).abs() < 1e-4);
        assert_eq!(reflected_max_cdf(0.0, 1.0), 0.0);
        assert!((arcsine_cdf(0.5) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959_964, 1.0) - 0.975).abs() < 1e-6);
        // density 1/(pi sqrt(u(1-u))) is smallest at 1/2
        let mass = |a: f64, b: f64| arcsine_cdf(b) - arcsine_cdf(a);
        assert!(mass(0.45, 0.55) < mass(0.0, 0.1));
    }

    #[test]
    fn ks_on_exact_quantiles_is_small() {
        let m = 1000;
        let xs: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let r = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0));
        assert!((r.distance - 0.5 / m as f64).abs() < 1e-12);
        assert!(r.p_value > 0.999);
        let r2 = ks_two_sample(&xs, &xs);
        assert_eq!(r2.distance, 0.0);
        let ints: Vec<f64> = (0..m).map(|i| i as f64).collect();
        let shifted: Vec<f64> = ints.iter().map(|x| x + 500.0).collect();
        assert!((ks_two_sample(&ints, &shifted).distance - 0.5).abs() < 1e-12);
    }
}
