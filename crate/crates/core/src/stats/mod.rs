//! Distributional checks of partial-sum ensembles against the exact
//! long-run variance: CLT marginal, Donsker functionals, LIL envelope,
//! covariance matrix and variance growth.

mod ks;

pub use ks::{
    arcsine_cdf, kolmogorov_sf, ks_one_sample, ks_two_sample, normal_cdf, reflected_max_cdf, KsResult, KOLMOGOROV_TERMS,
};

use crate::correlation::CorrelationReport;
use crate::error::{Error, Result};
use crate::numeric::quantile;
use crate::orbit::{rng, PathEnsemble};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Significance level of the KS-based tests.
pub const KS_LEVEL: f64 = 0.01;
/// Finite-n slack on the LIL envelope.
pub const LIL_SLACK: f64 = 0.5;
/// Smallest time index entering the LIL statistic.
pub const LIL_MIN_INDEX: usize = 16;
/// Width of the acceptance band, in standard errors.
pub const SE_MULTIPLIER: f64 = 4.0;
pub const BOOTSTRAP_RESAMPLES: usize = 400;
pub const VARIANCE_GROWTH_LAGS: [usize; 4] = [1 << 6, 1 << 8, 1 << 10, 1 << 12];

/// Header attached to every report bundle.
pub const PROXY_NOTE: &str = "Almost-sure approximation rates are not observable from simulation; \
these tests check distributional proxies (CLT marginal, Donsker functionals, LIL envelope, variance growth).";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Degenerate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Degenerate => "degenerate",
        }
    }
}

/// How the statistic is compared to the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// pass iff `p_value > threshold`
    PValueAbove,
    /// pass iff `statistic <= threshold`
    StatisticAtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub threshold: f64,
    pub rule: Rule,
    pub n_used: usize,
    pub m_used: usize,
    pub reference: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl TestReport {
    /// Same report under a different threshold; the verdict is re-derived.
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        if matches!(self.verdict, Verdict::Pass | Verdict::Fail) {
            self.verdict = Self::decide(self.rule, self.statistic, self.p_value, threshold);
        }
        self
    }

    fn decide(rule: Rule, statistic: f64, p_value: Option<f64>, threshold: f64) -> Verdict {
        let ok = match rule {
            Rule::PValueAbove => p_value.is_some_and(|p| p > threshold),
            Rule::StatisticAtMost => statistic <= threshold,
        };
        if statistic.is_nan() {
            Verdict::Inconclusive
        } else if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn degenerate(name: &str, n: usize, m: usize, reference: String, rule: Rule, threshold: f64) -> Self {
        TestReport {
            test_name: name.into(),
            statistic: 0.0,
            p_value: None,
            threshold,
            rule,
            n_used: n,
            m_used: m,
            reference,
            verdict: Verdict::Degenerate,
            details: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub header: String,
    pub reports: Vec<TestReport>,
}

impl ReportBundle {
    pub fn new(reports: Vec<TestReport>) -> Self {
        ReportBundle {
            header: PROXY_NOTE.into(),
            reports,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(TestReport::passed)
    }

    /// One row per test.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("test_name,statistic,p_value,threshold,rule,n_used,m_used,reference,verdict\n");
        for r in &self.reports {
            let rule = match r.rule {
                Rule::PValueAbove => "p_value>threshold",
                Rule::StatisticAtMost => "statistic<=threshold",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},\"{}\",{}\n",
                r.test_name,
                r.statistic,
                r.p_value.map(|p| p.to_string()).unwrap_or_default(),
                r.threshold,
                rule,
                r.n_used,
                r.m_used,
                r.reference.replace('"', "'"),
                r.verdict.as_str()
            ));
        }
        out
    }
}

fn check_n(ens: &PathEnsemble, n: usize) -> Result<()> {
    if n == 0 || n > ens.length() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} must lie in 1..={}",
            ens.length()
        )));
    }
    Ok(())
}

fn check_component(ens: &PathEnsemble, c: usize) -> Result<()> {
    if c >= ens.components() {
        return Err(Error::DimensionMismatch {
            expected: ens.components(),
            got: c + 1,
        });
    }
    Ok(())
}

fn scalar_only(ens: &PathEnsemble) -> Result<()> {
    if ens.components() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: ens.components(),
        });
    }
    Ok(())
}

/// KS test of `S_n / sqrt(n)` against `N(0, sigma2)`.
pub fn clt_test(ens: &PathEnsemble, sigma2: f64, n: usize) -> Result<TestReport> {
    scalar_only(ens)?;
    clt_test_component(ens, 0, sigma2, n)
}

pub fn clt_test_component(ens: &PathEnsemble, c: usize, sigma2: f64, n: usize) -> Result<TestReport> {
    check_n(ens, n)?;
    check_component(ens, c)?;
    let reference = format!("N(0, {sigma2})");
    if sigma2 <= 0.0 {
        return Ok(TestReport::degenerate(
            "clt",
            n,
            ens.paths(),
            reference,
            Rule::PValueAbove,
            KS_LEVEL,
        ));
    }
    let scale = (n as f64).sqrt();
    let xs: Vec<f64> = ens.endpoint_samples(n, c).iter().map(|s| s / scale).collect();
    let sigma = sigma2.sqrt();
    let ks = ks_one_sample(&xs, |x| normal_cdf(x, sigma));
    Ok(TestReport {
        test_name: "clt".into(),
        statistic: ks.distance,
        p_value: Some(ks.p_value),
        threshold: KS_LEVEL,
        rule: Rule::PValueAbove,
        n_used: n,
        m_used: ens.paths(),
        reference,
        verdict: TestReport::decide(Rule::PValueAbove, ks.distance, Some(ks.p_value), KS_LEVEL),
        details: BTreeMap::new(),
    })
}

/// Running maximum `max_{k<=n} S_k / sqrt(n)` and the fraction of
/// `k in 1..=n` with `S_k > 0`, per path.
pub fn path_functionals(ens: &PathEnsemble, c: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let scale = (n as f64).sqrt();
    (0..ens.paths())
        .map(|p| {
            let mut max: f64 = 0.0;
            let mut positive = 0usize;
            for k in 1..=n {
                let s = ens.partial_sum(p, k, c);
                max = max.max(s);
                if s > 0.0 {
                    positive += 1;
                }
            }
            (max / scale, positive as f64 / n as f64)
        })
        .unzip()
}

/// Max functional against the reflection principle and occupation time
/// against the arcsine law. The report passes iff both KS tests pass; the
/// individual results are in `details`.
pub fn donsker_functionals(ens: &PathEnsemble, sigma2: f64, n: usize) -> Result<TestReport> {
    scalar_only(ens)?;
    donsker_functionals_component(ens, 0, sigma2, n)
}

pub fn donsker_functionals_component(ens: &PathEnsemble, c: usize, sigma2: f64, n: usize) -> Result<TestReport> {
    check_n(ens, n)?;
    check_component(ens, c)?;
    let reference = format!("max: 2Phi(x/sigma)-1 with sigma^2 = {sigma2}; occupation: arcsine law");
    if sigma2 <= 0.0 {
        return Ok(TestReport::degenerate(
            "donsker",
            n,
            ens.paths(),
            reference,
            Rule::PValueAbove,
            KS_LEVEL,
        ));
    }
    let sigma = sigma2.sqrt();
    let (maxima, fractions) = path_functionals(ens, c, n);
    let max_ks = ks_one_sample(&maxima, |x| reflected_max_cdf(x, sigma));
    let arc_ks = ks_one_sample(&fractions, arcsine_cdf);
    let p = max_ks.p_value.min(arc_ks.p_value);
    let stat = max_ks.distance.max(arc_ks.distance);
    let mut details = BTreeMap::new();
    details.insert("max_ks_distance".into(), max_ks.distance);
    details.insert("max_p_value".into(), max_ks.p_value);
    details.insert("arcsine_ks_distance".into(), arc_ks.distance);
    details.insert("arcsine_p_value".into(), arc_ks.p_value);
    Ok(TestReport {
        test_name: "donsker".into(),
        statistic: stat,
        p_value: Some(p),
        threshold: KS_LEVEL,
        rule: Rule::PValueAbove,
        n_used: n,
        m_used: ens.paths(),
        reference,
        verdict: TestReport::decide(Rule::PValueAbove, stat, Some(p), KS_LEVEL),
        details,
    })
}

/// Per path, `max_{16 <= k <= N} |S_k| / sqrt(2 sigma2 k log log k)`.
pub fn lil_statistics(ens: &PathEnsemble, c: usize, sigma2: f64) -> Vec<f64> {
    let n = ens.length();
    let norms: Vec<f64> = (LIL_MIN_INDEX..=n)
        .map(|k| {
            let kf = k as f64;
            (2.0 * sigma2 * kf * kf.ln().ln()).sqrt()
        })
        .collect();
    (0..ens.paths())
        .map(|p| {
            (LIL_MIN_INDEX..=n)
                .zip(&norms)
                .map(|(k, d)| ens.partial_sum(p, k, c).abs() / d)
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Upper quantiles of the normalized LIL maximum; passes iff the 99th
/// percentile is at most `1 + LIL_SLACK`.
pub fn lil_envelope(ens: &PathEnsemble, sigma2: f64) -> Result<TestReport> {
    scalar_only(ens)?;
    lil_envelope_component(ens, 0, sigma2)
}

pub fn lil_envelope_component(ens: &PathEnsemble, c: usize, sigma2: f64) -> Result<TestReport> {
    check_component(ens, c)?;
    let n = ens.length();
    let threshold = 1.0 + LIL_SLACK;
    let reference = format!("sqrt(2 sigma^2 k log log k) with sigma^2 = {sigma2}");
    if n < 1 << 14 {
        return Err(Error::InvalidParameter(format!(
            "LIL envelope needs N >= 16384, got {n}"
        )));
    }
    let identically_zero = (0..ens.paths()).all(|p| ens.path(p, c).all(|s| s == 0.0));
    if sigma2 <= 0.0 && !identically_zero {
        return Ok(TestReport::degenerate(
            "lil",
            n,
            ens.paths(),
            reference,
            Rule::StatisticAtMost,
            threshold,
        ));
    }
    let mut stats = if identically_zero {
        vec![0.0; ens.paths()]
    } else {
        lil_statistics(ens, c, sigma2)
    };
    stats.sort_by(f64::total_cmp);
    let p99 = quantile(&stats, 0.99);
    let mut details = BTreeMap::new();
    for (name, prob) in [("q50", 0.5), ("q90", 0.9), ("q95", 0.95), ("q99", 0.99)] {
        details.insert(name.into(), quantile(&stats, prob));
    }
    details.insert("max".into(), *stats.last().unwrap());
    Ok(TestReport {
        test_name: "lil".into(),
        statistic: p99,
        p_value: None,
        threshold,
        rule: Rule::StatisticAtMost,
        n_used: n,
        m_used: ens.paths(),
        reference,
        verdict: TestReport::decide(Rule::StatisticAtMost, p99, None, threshold),
        details,
    })
}

/// Entrywise comparison of the empirical covariance of `S_n / sqrt(n)`
/// with `sigma`, using 4th-moment plug-in standard errors.
pub fn covariance_matrix_test(ens: &PathEnsemble, sigma: &[Vec<f64>], n: usize) -> Result<TestReport> {
    check_n(ens, n)?;
    let m = ens.components();
    if sigma.len() != m || sigma.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: sigma.len(),
        });
    }
    let paths = ens.paths();
    if paths < 2 {
        return Err(Error::InvalidParameter(
            "covariance test needs at least two paths".into(),
        ));
    }
    let scale = (n as f64).sqrt();
    let ys: Vec<Vec<f64>> = (0..m)
        .map(|c| ens.endpoint_samples(n, c).iter().map(|s| s / scale).collect())
        .collect();
    let means: Vec<f64> = ys.iter().map(|y| y.iter().sum::<f64>() / paths as f64).collect();
    let mf = paths as f64;
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    let mut details = BTreeMap::new();
    for i in 0..m {
        for j in i..m {
            let prods: Vec<f64> = (0..paths)
                .map(|p| (ys[i][p] - means[i]) * (ys[j][p] - means[j]))
                .collect();
            let cov = prods.iter().sum::<f64>() / (mf - 1.0);
            let pm = prods.iter().sum::<f64>() / mf;
            let var_prod = prods.iter().map(|x| (x - pm) * (x - pm)).sum::<f64>() / (mf - 1.0);
            let se = (var_prod / mf).sqrt();
            let dev = (cov - sigma[i][j]).abs();
            let z = if se > 0.0 {
                dev / se
            } else if dev == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            if !(dev <= SE_MULTIPLIER * se) {
                all_ok = false;
            }
            worst = worst.max(z);
            details.insert(format!("cov_{i}_{j}"), cov);
            details.insert(format!("se_{i}_{j}"), se);
        }
    }
    let verdict = if all_ok { Verdict::Pass } else { Verdict::Fail };
    Ok(TestReport {
        test_name: "covariance".into(),
        statistic: worst,
        p_value: None,
        threshold: SE_MULTIPLIER,
        rule: Rule::StatisticAtMost,
        n_used: n,
        m_used: paths,
        reference: "exact long-run covariance matrix".into(),
        verdict,
        details,
    })
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Bootstrap standard error of the sample variance.
pub fn bootstrap_variance_se(xs: &[f64], resamples: usize, seed: u64) -> f64 {
    let mut r = rng::path_rng(seed);
    let m = xs.len();
    let mut buf = vec![0.0; m];
    let reps: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[r.random_range(0..m)];
            }
            sample_variance(&buf)
        })
        .collect();
    sample_variance(&reps).sqrt()
}

/// Empirical `Var(S_n)/n` against the exact profile at
/// `n in {2^6, 2^8, 2^10, 2^12}` (those not exceeding `N`).
pub fn variance_growth(ens: &PathEnsemble, report: &CorrelationReport) -> Result<TestReport> {
    variance_growth_at(ens, report, &VARIANCE_GROWTH_LAGS)
}

pub fn variance_growth_at(ens: &PathEnsemble, report: &CorrelationReport, lags: &[usize]) -> Result<TestReport> {
    scalar_only(ens)?;
    variance_growth_component(ens, 0, report, lags)
}

/// Variance growth of component `c` against the diagonal entry of the
/// exact profile.
pub fn variance_growth_component(
    ens: &PathEnsemble,
    c: usize,
    report: &CorrelationReport,
    lags: &[usize],
) -> Result<TestReport> {
    check_component(ens, c)?;
    if report.components != ens.components() {
        return Err(Error::DimensionMismatch {
            expected: ens.components(),
            got: report.components,
        });
    }
    let used: Vec<usize> = lags.iter().copied().filter(|&n| n >= 1 && n <= ens.length()).collect();
    let mut details = BTreeMap::new();
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for &n in &used {
        let xs = ens.endpoint_samples(n, c);
        let emp = sample_variance(&xs) / n as f64;
        let seed = rng::path_seed(ens.meta.master_seed ^ 0x5641_5247_524f_5754, n as u64);
        let se = bootstrap_variance_se(&xs, BOOTSTRAP_RESAMPLES, seed) / n as f64;
        let exact = report.variance_profile(n as u64)[c][c];
        let dev = (emp - exact).abs();
        let z = if se > 0.0 {
            dev / se
        } else if dev <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        if !(z <= SE_MULTIPLIER) {
            all_ok = false;
        }
        worst = worst.max(z);
        details.insert(format!("empirical_{n}"), emp);
        details.insert(format!("exact_{n}"), exact);
        details.insert(format!("se_{n}"), se);
    }
    let verdict = if used.is_empty() {
        Verdict::Inconclusive
    } else if all_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(TestReport {
        test_name: "variance_growth".into(),
        statistic: worst,
        p_value: None,
        threshold: SE_MULTIPLIER,
        rule: Rule::StatisticAtMost,
        n_used: used.last().copied().unwrap_or(0),
        m_used: ens.paths(),
        reference: "exact variance profile Var(S_n)/n".into(),
        verdict,
        details,
    })
}
