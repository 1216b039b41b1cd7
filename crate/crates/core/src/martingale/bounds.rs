use super::conditions::{check_summability, Condition, SummabilityVerdict};
use super::model::{MarkovProcessModel, StateTable};
use super::projection::{conditional_norms, d0_table, PairTable};
use crate::error::{Error, Result};
use crate::orbit::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Agreement required between enumeration and the closed forms.
pub const ENUMERATION_TOL: f64 = 1e-10;
/// Smallest Monte Carlo sample for the maximal remainder.
pub const MIN_MONTE_CARLO_PATHS: usize = 10_000;
/// Largest `n` enumerated exhaustively.
pub const MAX_ENUMERATION_N: usize = 10;

/// Closed forms for the coboundary `R_n = S_n - M_n`.
struct Remainder {
    adapted: bool,
    /// `P G^`
    pgh: StateTable,
    /// `H` (non-adapted case)
    hmean: StateTable,
}

impl Remainder {
    fn new(model: &MarkovProcessModel) -> Result<Self> {
        let gh = model.poisson_solution()?;
        Ok(Remainder {
            adapted: model.is_adapted(),
            pgh: model.apply(&gh),
            hmean: model.conditional_mean(),
        })
    }

    /// `R_n` from `(xi_0, xi_1, xi_n, xi_{n+1})`.
    fn value(&self, model: &MarkovProcessModel, x0: usize, x1: usize, xn: usize, xn1: usize, out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let mut v = self.pgh[x0][c] - self.pgh[xn][c];
            if !self.adapted {
                v += model.x_value(xn, xn1)[c] - model.x_value(x0, x1)[c] + self.hmean[x0][c] - self.hmean[xn][c];
            }
            *o = v;
        }
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let s = b.len();
    a.iter()
        .map(|row| (0..s).map(|c| (0..s).map(|k| row[k] * b[k][c]).sum()).collect())
        .collect()
}

/// Exact `|| R_n ||_p` over the joint law of `(xi_0, xi_1, xi_n, xi_{n+1})`.
fn remainder_norms(model: &MarkovProcessModel, rem: &Remainder, p: f64, grid: &[usize]) -> Vec<f64> {
    let s = model.states();
    let m = model.components();
    let pi = model.stationary();
    let tr = model.transition();
    let n_max = grid.iter().copied().max().unwrap_or(1);
    let mut power: Vec<Vec<f64>> = (0..s)
        .map(|r| (0..s).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut out = Vec::with_capacity(grid.len());
    let mut buf = vec![0.0; m];
    // power holds P^{n-1}
    for n in 1..=n_max {
        if grid.contains(&n) {
            let mut acc = 0.0;
            for a in 0..s {
                for b in 0..s {
                    let wab = pi[a] * tr[a][b];
                    if wab == 0.0 {
                        continue;
                    }
                    for c in 0..s {
                        let wabc = wab * power[b][c];
                        if wabc == 0.0 {
                            continue;
                        }
                        for d in 0..s {
                            let w = wabc * tr[c][d];
                            if w == 0.0 {
                                continue;
                            }
                            rem.value(model, a, b, c, d, &mut buf);
                            let e = euclid(&buf);
                            if e > 0.0 {
                                acc += w * e.powf(p);
                            }
                        }
                    }
                }
            }
            out.push(acc.powf(1.0 / p));
        }
        power = mat_mul(&power, tr);
    }
    out
}

/// Exhaustive enumeration of every trajectory `xi_0, ..., xi_{n+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationCheck {
    pub n: usize,
    pub trajectories: usize,
    /// `max |S_n - M_n - R_n|` with `R_n` from the closed form
    pub telescoping_defect: f64,
    pub remainder_norm_enumerated: f64,
    pub remainder_norm_exact: f64,
    /// `E |M_n|^2`
    pub martingale_second_moment: f64,
    /// `sum_{i<=n} E |d_i|^2`
    pub increment_second_moments: f64,
}

impl EnumerationCheck {
    pub fn consistent(&self) -> bool {
        let scale = 1.0f64.max(self.martingale_second_moment);
        self.telescoping_defect <= ENUMERATION_TOL
            && (self.remainder_norm_enumerated - self.remainder_norm_exact).abs() <= ENUMERATION_TOL
            && (self.martingale_second_moment - self.increment_second_moments).abs() <= ENUMERATION_TOL * scale
    }
}

#[derive(Default)]
struct EnumAcc {
    count: usize,
    defect: f64,
    rem_p: f64,
    m2: f64,
}

pub fn enumerate_decomposition(model: &MarkovProcessModel, p: f64, n: usize) -> Result<EnumerationCheck> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(Error::InvalidParameter(format!(
            "enumeration needs 1 <= n <= {MAX_ENUMERATION_N}"
        )));
    }
    let s = model.states();
    let len = n + 2;
    let total = (s as u128).pow(len as u32);
    if total > 50_000_000 {
        return Err(Error::InvalidParameter(format!(
            "{total} trajectories are too many to enumerate"
        )));
    }
    let rem = Remainder::new(model)?;
    let d0 = d0_table(model)?;
    let pi = model.stationary();
    let tr = model.transition();
    let d0_sq: f64 = (0..s)
        .flat_map(|a| (0..s).map(move |b| (a, b)))
        .map(|(a, b)| pi[a] * tr[a][b] * euclid(&d0[a][b]).powi(2))
        .sum();

    let per_start: Vec<EnumAcc> = (0..s)
        .into_par_iter()
        .map(|start| enumerate_from(model, &rem, &d0, p, n, start))
        .collect();
    let mut acc = EnumAcc::default();
    for part in per_start {
        acc.count += part.count;
        acc.defect = acc.defect.max(part.defect);
        acc.rem_p += part.rem_p;
        acc.m2 += part.m2;
    }
    let exact = remainder_norms(model, &rem, p, &[n])[0];
    Ok(EnumerationCheck {
        n,
        trajectories: acc.count,
        telescoping_defect: acc.defect,
        remainder_norm_enumerated: acc.rem_p.powf(1.0 / p),
        remainder_norm_exact: exact,
        martingale_second_moment: acc.m2,
        increment_second_moments: n as f64 * d0_sq,
    })
}

fn enumerate_from(
    model: &MarkovProcessModel,
    rem: &Remainder,
    d0: &PairTable,
    p: f64,
    n: usize,
    start: usize,
) -> EnumAcc {
    let s = model.states();
    let m = model.components();
    let len = n + 2;
    let pi = model.stationary();
    let tr = model.transition();
    let mut acc = EnumAcc::default();
    let mut path = vec![0usize; len];
    path[0] = start;
    let mut sn = vec![0.0; m];
    let mut mn = vec![0.0; m];
    let mut r = vec![0.0; m];
    let inner = s.pow((len - 1) as u32);
    for code in 0..inner {
        let mut c = code;
        for slot in path.iter_mut().skip(1) {
            *slot = c % s;
            c /= s;
        }
        let mut w = pi[start];
        for i in 0..len - 1 {
            w *= tr[path[i]][path[i + 1]];
        }
        if w == 0.0 {
            continue;
        }
        acc.count += 1;
        sn.fill(0.0);
        mn.fill(0.0);
        for i in 1..=n {
            let x = model.x_value(path[i], path[i + 1]);
            let d = &d0[path[i - 1]][path[i]];
            for k in 0..m {
                sn[k] += x[k];
                mn[k] += d[k];
            }
        }
        rem.value(model, path[0], path[1], path[n], path[n + 1], &mut r);
        let diff: Vec<f64> = (0..m).map(|k| sn[k] - mn[k] - r[k]).collect();
        acc.defect = acc.defect.max(euclid(&diff));
        let e = euclid(&r);
        if e > 0.0 {
            acc.rem_p += w * e.powf(p);
        }
        acc.m2 += w * euclid(&mn).powi(2);
    }
    acc
}

fn p_prime(p: f64) -> f64 {
    p.min(2.0)
}

fn validate_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "grid must be non-empty, positive and increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderBoundReport {
    pub p: f64,
    pub p_prime: f64,
    pub grid: Vec<usize>,
    /// `|| R_n ||_p^{p'}`
    pub lhs: Vec<f64>,
    /// `sum_{k<=n} (sum_{|l|>=k} || P_l(X_0) ||_p)^{p'}`
    pub rhs: Vec<f64>,
    pub ratios: Vec<f64>,
    pub fitted_constant: f64,
    /// The ratio has settled: its last two values differ by at most 5% of
    /// the fitted constant.
    pub stable: bool,
    pub holds: bool,
    pub enumeration: Vec<EnumerationCheck>,
}

/// Moment bound on the coboundary: `|| R_n ||^{p'} <= C sum_k (tail_k)^{p'}`
/// with one constant across the grid.
pub fn verify_remainder_bound(model: &MarkovProcessModel, p: f64, grid: &[usize]) -> Result<RemainderBoundReport> {
    validate_grid(grid)?;
    let n_max = *grid.last().unwrap();
    let table = conditional_norms(model, p, (2 * n_max).max(256))?;
    let summable = check_summability(&table, Condition::ProjectiveSum)?;
    if summable.verdict != SummabilityVerdict::Converges {
        return Err(Error::DivergentSeries(format!(
            "projection norms are not summable ({:?})",
            summable.verdict
        )));
    }
    let pp = p_prime(p);
    // tail[k] = sum_{l >= k} (||P_0(X_l)|| + ||P_0(X_{-l})||)
    let lags = table.max_lag;
    let mut tail = vec![0.0; lags + 2];
    for l in (0..=lags).rev() {
        tail[l] = tail[l + 1] + table.forward[l] + table.backward[l];
    }
    let mut rhs = Vec::with_capacity(grid.len());
    let mut running = 0.0;
    let mut k = 1;
    for &n in grid {
        while k <= n {
            running += tail[k].powf(pp);
            k += 1;
        }
        rhs.push(running);
    }
    let rem = Remainder::new(model)?;
    let lhs: Vec<f64> = remainder_norms(model, &rem, p, grid)
        .iter()
        .map(|v| v.powf(pp))
        .collect();
    let scale = lhs.iter().chain(&rhs).fold(0.0f64, |a, &b| a.max(b)).max(1.0);
    let ratios: Vec<f64> = lhs
        .iter()
        .zip(&rhs)
        .map(|(&l, &r)| {
            if r > 0.0 {
                l / r
            } else if l <= 1e-12 * scale {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let fitted_constant = ratios.iter().copied().fold(0.0, f64::max);
    let stable = match ratios.len() {
        0 | 1 => true,
        len => (ratios[len - 1] - ratios[len - 2]).abs() <= 0.05 * fitted_constant,
    };
    let enumeration = grid
        .iter()
        .copied()
        .filter(|&n| n <= MAX_ENUMERATION_N && (model.states() as f64).powi(n as i32 + 2) <= 5e6)
        .map(|n| enumerate_decomposition(model, p, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(RemainderBoundReport {
        p,
        p_prime: pp,
        grid: grid.to_vec(),
        lhs,
        rhs,
        ratios,
        fitted_constant,
        stable,
        holds: fitted_constant.is_finite() && stable,
        enumeration,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalRemainderReport {
    pub p: f64,
    pub p_prime: f64,
    pub grid: Vec<usize>,
    pub paths: usize,
    pub seed: u64,
    /// Monte Carlo estimates of `|| max_{k<=n} |R_k| ||_p`
    pub norms: Vec<f64>,
    /// `norms[i] / n^{1/p'}`
    pub ratios: Vec<f64>,
    /// Grid index from which strict decrease is required (first `n >= 64`).
    pub from_index: usize,
    pub decreasing: bool,
}

/// Growth of `max_{k<=n} |R_k|` by Monte Carlo; the normalized ratio must
/// strictly decrease over grid points `n >= 64`. All grid points share the
/// same simulated trajectories.
pub fn verify_maximal_remainder(
    model: &MarkovProcessModel,
    p: f64,
    grid: &[usize],
    paths: usize,
    seed: u64,
) -> Result<MaximalRemainderReport> {
    validate_grid(grid)?;
    if paths < MIN_MONTE_CARLO_PATHS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_MONTE_CARLO_PATHS} Monte Carlo paths, got {paths}"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
    }
    let pp = p_prime(p);
    let rem = Remainder::new(model)?;
    let n_max = *grid.last().unwrap();
    let m = model.components();
    let per_path: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::path_rng(rng::path_seed(seed, i));
            let mut states = Vec::with_capacity(n_max + 2);
            states.push(model.sample_stationary(&mut r));
            for k in 0..=n_max {
                let next = model.sample_next(states[k], &mut r);
                states.push(next);
            }
            let mut buf = vec![0.0; m];
            let mut running: f64 = 0.0;
            let mut out = Vec::with_capacity(grid.len());
            let mut gi = 0;
            for k in 1..=n_max {
                rem.value(model, states[0], states[1], states[k], states[k + 1], &mut buf);
                running = running.max(euclid(&buf));
                if grid[gi] == k {
                    out.push(running.powf(p));
                    gi += 1;
                }
            }
            out
        })
        .collect();
    let mut sums = vec![0.0; grid.len()];
    for row in &per_path {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    let norms: Vec<f64> = sums.iter().map(|s| (s / paths as f64).powf(1.0 / p)).collect();
    let ratios: Vec<f64> = norms
        .iter()
        .zip(grid)
        .map(|(v, &n)| v / (n as f64).powf(1.0 / pp))
        .collect();
    let from_index = grid.iter().position(|&n| n >= 64).unwrap_or(grid.len());
    let all_zero = ratios.iter().all(|&r| r == 0.0);
    let decreasing = all_zero || ratios[from_index.min(ratios.len())..].windows(2).all(|w| w[1] < w[0]);
    Ok(MaximalRemainderReport {
        p,
        p_prime: pp,
        grid: grid.to_vec(),
        paths,
        seed,
        norms,
        ratios,
        from_index,
        decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::super::model::Observable;
    use super::super::projection::chain_long_run_covariance;
    use super::*;

    fn models() -> Vec<MarkovProcessModel> {
        vec![
            MarkovProcessModel::two_state_flip(0.3).unwrap(),
            MarkovProcessModel::centered(
                vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3], vec![0.3, 0.3, 0.4]],
                Observable::adapted_scalar(&[1.0, -2.0, 0.5]),
            )
            .unwrap(),
            MarkovProcessModel::centered(
                vec![vec![0.7, 0.3], vec![0.4, 0.6]],
                Observable::non_adapted_scalar(&[vec![1.0, -1.0], vec![0.5, 2.0]]),
            )
            .unwrap(),
            MarkovProcessModel::centered(
                vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.25, 0.25], vec![0.2, 0.2, 0.6]],
                Observable::non_adapted_scalar(&[vec![1.0, 0.0, -3.0], vec![2.0, -1.0, 0.5], vec![0.0, 1.5, -0.5]]),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn enumeration_agrees_with_closed_forms() {
        for m in models() {
            let sigma2 = chain_long_run_covariance(&m)[0][0];
            for n in 1..=8 {
                for p in [2.0, 3.0] {
                    let e = enumerate_decomposition(&m, p, n).unwrap();
                    assert!(e.consistent(), "{e:?}");
                    assert!((e.martingale_second_moment / n as f64 - sigma2).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn iid_chain_has_no_remainder() {
        let m = MarkovProcessModel::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            Observable::adapted_scalar(&[1.0, -1.0]),
        )
        .unwrap();
        let r = verify_remainder_bound(&m, 2.0, &[16, 32, 64]).unwrap();
        assert!(r.lhs.iter().all(|&v| v == 0.0));
        assert!(r.holds && r.fitted_constant == 0.0);
        let mx = verify_maximal_remainder(&m, 2.0, &[16, 64, 128], 10_000, 1).unwrap();
        assert!(mx.ratios.iter().all(|&v| v == 0.0) && mx.decreasing);
    }

    #[test]
    fn remainder_bound_holds_with_one_constant() {
        let grid: Vec<usize> = (4..=10).map(|k| 1 << k).collect();
        for m in models() {
            for p in [2.0, 3.0, 1.5] {
                let r = verify_remainder_bound(&m, p, &grid).unwrap();
                assert!(r.holds, "{r:?}");
                for ((l, rh), c) in r.lhs.iter().zip(&r.rhs).zip(std::iter::repeat(r.fitted_constant)) {
                    assert!(*l <= c * rh * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn maximal_remainder_ratio_decreases() {
        let grid: Vec<usize> = (4..=10).map(|k| 1 << k).collect();
        let mut ms = models();
        ms.push(MarkovProcessModel::two_state_flip(0.05).unwrap());
        for m in ms {
            let r = verify_maximal_remainder(&m, 2.0, &grid, 10_000, 9).unwrap();
            assert!(r.decreasing, "{r:?}");
        }
        let m = MarkovProcessModel::two_state_flip(0.3).unwrap();
        assert!(verify_maximal_remainder(&m, 2.0, &grid, 100, 9).is_err());
    }
}
