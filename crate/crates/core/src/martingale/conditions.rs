//! Summability checks for projective and conditional-mean conditions,
//! decided from a finite table by fitting the tail on the last decade of
//! lags.

use super::projection::ProjectionTable;
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, NeumaierSum};
use serde::{Deserialize, Serialize};

/// Tail norms below this fraction of the largest norm in the sequence are
/// treated as rounding residue, i.e. the series has already converged.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;
/// Minimum coefficient of determination for a usable tail fit.
pub const MIN_R_SQUARED: f64 = 0.9;
/// A polynomial tail `n^{-beta}` counts as summable only for `beta > 1 + margin`.
pub const POLYNOMIAL_MARGIN: f64 = 0.25;
/// Smallest table length the checks accept.
pub const MIN_LAGS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `sum_{n in Z} || P_0(X_n) ||`
    ProjectiveSum,
    /// `sum_{n>=3} log n (|| P_0(X_n) || + || P_0(X_{-n}) ||) / (log log n)^{1/2}`
    WeightedProjectiveSum,
    /// `sum_{n>=1} n^{-1/2} (|| E_0(X_n) || + || X_{-n} - E_0(X_{-n}) ||)`
    ConditionalMeanSum,
    /// `sum_{n>=3} log n / (n^{1/2} (log log n)^{1/2}) (|| E_0(X_n) || + || X_{-n} - E_0(X_{-n}) ||)`
    WeightedConditionalMeanSum,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::ProjectiveSum,
        Condition::WeightedProjectiveSum,
        Condition::ConditionalMeanSum,
        Condition::WeightedConditionalMeanSum,
    ];

    fn first_index(self) -> usize {
        match self {
            Condition::ProjectiveSum => 0,
            Condition::ConditionalMeanSum => 1,
            _ => 3,
        }
    }

    /// The unweighted norms behind the `n`-th term.
    fn norm(self, t: &ProjectionTable, n: usize) -> f64 {
        match self {
            Condition::ProjectiveSum | Condition::WeightedProjectiveSum => t.forward[n] + t.backward[n],
            _ => t.conditional_mean[n] + t.past_residual[n],
        }
    }

    /// The `n`-th term of the series. For `n = 0` the projective sum
    /// counts `P_0(X_0)` once.
    fn term(self, t: &ProjectionTable, n: usize) -> f64 {
        let nf = n as f64;
        let log_weight = || nf.ln() / nf.ln().ln().sqrt();
        match self {
            Condition::ProjectiveSum if n == 0 => t.forward[0],
            Condition::ProjectiveSum => t.forward[n] + t.backward[n],
            Condition::WeightedProjectiveSum => log_weight() * (t.forward[n] + t.backward[n]),
            Condition::ConditionalMeanSum => (t.conditional_mean[n] + t.past_residual[n]) / nf.sqrt(),
            Condition::WeightedConditionalMeanSum => {
                log_weight() / nf.sqrt() * (t.conditional_mean[n] + t.past_residual[n])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummabilityVerdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TailModel {
    /// terms below the round-off floor
    Negligible,
    Geometric {
        rate: f64,
        r_squared: f64,
    },
    Polynomial {
        exponent: f64,
        r_squared: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub condition: Condition,
    pub verdict: SummabilityVerdict,
    pub converges: bool,
    /// Partial sums up to each lag, starting at the first index of the series.
    pub partial_sums: Vec<f64>,
    pub first_index: usize,
    pub fitted_tail: Option<TailModel>,
    /// Partial sum plus the fitted tail, when the fit says it converges.
    pub extrapolated_sum: Option<f64>,
}

pub fn check_summability(table: &ProjectionTable, which: Condition) -> Result<SummabilityReport> {
    let lags = table.max_lag;
    if lags < MIN_LAGS {
        return Err(Error::InvalidParameter(format!(
            "summability checks need at least {MIN_LAGS} lags, table has {lags}"
        )));
    }
    let len_ok = [
        &table.forward,
        &table.backward,
        &table.conditional_mean,
        &table.past_residual,
    ]
    .iter()
    .all(|v| v.len() > lags);
    if !len_ok {
        return Err(Error::InvalidParameter(
            "norm sequences are shorter than max_lag + 1".into(),
        ));
    }
    let first = which.first_index();
    let terms: Vec<f64> = (first..=lags).map(|n| which.term(table, n)).collect();
    if terms.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter(
            "series terms must be finite and non-negative".into(),
        ));
    }
    let mut acc = NeumaierSum::default();
    let partial_sums: Vec<f64> = terms
        .iter()
        .map(|&t| {
            acc.add(t);
            acc.total()
        })
        .collect();
    let total = *partial_sums.last().unwrap();

    let window_start = (lags / 10).max(first).max(1);
    let window: Vec<(f64, f64)> = (window_start..=lags).map(|n| (n as f64, terms[n - first])).collect();
    let largest = window.iter().fold(0.0f64, |a, &(_, t)| a.max(t));
    // Norms this far below the largest one are floating-point residue.
    let scale = (0..=lags).fold(0.0f64, |a, n| a.max(which.norm(table, n)));
    let tail_norm = (window_start..=lags).fold(0.0f64, |a, n| a.max(which.norm(table, n)));
    // terms that vanish identically from some lag on leave a finite sum
    let vanishes = terms.last() == Some(&0.0) && terms.iter().rev().take(lags / 10).all(|&t| t == 0.0);

    let (verdict, fitted_tail, extrapolated_sum) = if largest == 0.0 || vanishes || tail_norm <= ROUNDOFF_FLOOR * scale
    {
        (SummabilityVerdict::Converges, Some(TailModel::Negligible), Some(total))
    } else if window.iter().any(|&(_, t)| t == 0.0) {
        (SummabilityVerdict::Inconclusive, None, None)
    } else {
        let ns: Vec<f64> = window.iter().map(|w| w.0).collect();
        let log_ns: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
        let log_ts: Vec<f64> = window.iter().map(|w| w.1.ln()).collect();
        let geo = linear_fit(&ns, &log_ts);
        let poly = linear_fit(&log_ns, &log_ts);
        let last = window.last().unwrap().1;
        let lf = lags as f64;
        match (geo, poly) {
            (Some(g), Some(p)) if g.r_squared.max(p.r_squared) >= MIN_R_SQUARED => {
                if g.r_squared > p.r_squared {
                    let rate = g.slope.exp();
                    let model = TailModel::Geometric {
                        rate,
                        r_squared: g.r_squared,
                    };
                    if g.slope < -1e-4 {
                        let tail = last * rate / (1.0 - rate);
                        (SummabilityVerdict::Converges, Some(model), Some(total + tail))
                    } else if g.slope >= 0.0 {
                        (SummabilityVerdict::Diverges, Some(model), None)
                    } else {
                        (SummabilityVerdict::Inconclusive, Some(model), None)
                    }
                } else {
                    let exponent = -p.slope;
                    let model = TailModel::Polynomial {
                        exponent,
                        r_squared: p.r_squared,
                    };
                    if exponent > 1.0 + POLYNOMIAL_MARGIN {
                        let tail = last * lf / (exponent - 1.0);
                        (SummabilityVerdict::Converges, Some(model), Some(total + tail))
                    } else if exponent <= 1.0 + 1e-6 {
                        (SummabilityVerdict::Diverges, Some(model), None)
                    } else {
                        (SummabilityVerdict::Inconclusive, Some(model), None)
                    }
                }
            }
            _ => (SummabilityVerdict::Inconclusive, None, None),
        }
    };
    Ok(SummabilityReport {
        condition: which,
        verdict,
        converges: verdict == SummabilityVerdict::Converges,
        partial_sums,
        first_index: first,
        fitted_tail,
        extrapolated_sum,
    })
}

/// All four checks on one table.
pub fn check_all(table: &ProjectionTable) -> Result<Vec<SummabilityReport>> {
    Condition::ALL.iter().map(|&c| check_summability(table, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::{conditional_norms, MarkovProcessModel};

    fn synthetic(cm: impl Fn(usize) -> f64, lags: usize) -> ProjectionTable {
        let zeros = vec![0.0; lags + 1];
        let seq: Vec<f64> = (0..=lags).map(|n| if n == 0 { 0.0 } else { cm(n) }).collect();
        ProjectionTable::from_sequences(seq.clone(), zeros.clone(), seq, zeros)
    }

    #[test]
    fn geometric_chains_satisfy_everything() {
        for a in [0.05, 0.3, 0.45] {
            let m = MarkovProcessModel::two_state_flip(a).unwrap();
            let t = conditional_norms(&m, 2.0, 256).unwrap();
            for r in check_all(&t).unwrap() {
                assert!(r.converges, "a = {a}: {r:?}");
            }
        }
    }

    #[test]
    fn harmonic_injection_diverges() {
        let t = synthetic(|n| (n as f64).powf(-0.5), 1000);
        let r = check_summability(&t, Condition::ConditionalMeanSum).unwrap();
        assert_eq!(r.verdict, SummabilityVerdict::Diverges);
        // partial sums track the harmonic numbers
        let h: f64 = (1..=1000).map(|n| 1.0 / n as f64).sum();
        assert!((r.partial_sums.last().unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn log_damped_injection_converges_for_the_weighted_sum() {
        let t = synthetic(
            |n| {
                if n < 2 {
                    0.0
                } else {
                    1.0 / (n as f64 * (n as f64).ln().powi(3))
                }
            },
            1000,
        );
        let r = check_summability(&t, Condition::WeightedConditionalMeanSum).unwrap();
        assert_eq!(r.verdict, SummabilityVerdict::Converges, "{r:?}");
        assert!(matches!(r.fitted_tail, Some(TailModel::Polynomial { .. })));
    }

    #[test]
    fn erratic_tail_is_inconclusive() {
        let t = synthetic(|n| if n % 2 == 0 { 1.0 } else { 1e-3 / n as f64 }, 500);
        let r = check_summability(&t, Condition::ConditionalMeanSum).unwrap();
        assert_eq!(r.verdict, SummabilityVerdict::Inconclusive);
        let short = synthetic(|_| 1.0, 10);
        assert!(check_summability(&short, Condition::ProjectiveSum).is_err());
    }
}
