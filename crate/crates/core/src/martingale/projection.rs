use super::model::{lp_norm, MarkovProcessModel, StateTable};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A function of `(xi_{-1}, xi_0)`, indexed `[previous][current]`.
pub type PairTable = Vec<Vec<Vec<f64>>>;

/// Exact `L^p` norms of the projections and conditional expectations, the
/// martingale difference `d_0` and the Poisson solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTable {
    pub p: f64,
    pub max_lag: usize,
    pub adapted: bool,
    /// `|| P_0(X_l) ||` for `l = 0..=L`
    pub forward: Vec<f64>,
    /// `|| P_0(X_{-l}) ||` for `l = 0..=L`
    pub backward: Vec<f64>,
    /// `|| E_0(X_n) ||` for `n = 0..=L`
    pub conditional_mean: Vec<f64>,
    /// `|| X_{-n} - E_0(X_{-n}) ||` for `n = 0..=L`
    pub past_residual: Vec<f64>,
    /// `d_0` as a function of `(xi_{-1}, xi_0)`
    pub d0: PairTable,
    /// `G^` with `(I - P) G^ = G`, `G(a) = E(X_0 | xi_0 = a)`
    pub poisson_solution: StateTable,
}

impl ProjectionTable {
    /// A table holding only the four norm sequences, for exercising the
    /// summability checks on prescribed decay.
    pub fn from_sequences(
        forward: Vec<f64>,
        backward: Vec<f64>,
        conditional_mean: Vec<f64>,
        past_residual: Vec<f64>,
    ) -> Self {
        let max_lag = forward.len().saturating_sub(1);
        ProjectionTable {
            p: 2.0,
            max_lag,
            adapted: false,
            forward,
            backward,
            conditional_mean,
            past_residual,
            d0: Vec::new(),
            poisson_solution: Vec::new(),
        }
    }
}

fn pair_weights(model: &MarkovProcessModel) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
    let s = model.states();
    let pi = model.stationary();
    let p = model.transition();
    (0..s).flat_map(move |a| (0..s).map(move |b| (a, b, pi[a] * p[a][b])))
}

fn pair_norm(model: &MarkovProcessModel, table: &PairTable, p: f64) -> f64 {
    lp_norm(pair_weights(model).map(|(a, b, w)| (w, table[a][b].as_slice())), p)
}

fn state_norm(model: &MarkovProcessModel, v: &StateTable, p: f64) -> f64 {
    lp_norm(model.stationary().iter().zip(v).map(|(&w, x)| (w, x.as_slice())), p)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += x;
    }
}

/// `(P^l G)(xi_0) - (P^{l+1} G)(xi_{-1})` from `P^l G` and `P^{l+1} G`.
fn difference_table(cur: &StateTable, next: &StateTable) -> PairTable {
    next.iter()
        .map(|prev| cur.iter().map(|now| sub(now, prev)).collect())
        .collect()
}

/// `h(xi_{-1}, xi_0) - H(xi_{-1})`: the one-step look-ahead part, zero in
/// the adapted case.
fn lookahead_table(model: &MarkovProcessModel) -> PairTable {
    let s = model.states();
    let m = model.components();
    if model.is_adapted() {
        return vec![vec![vec![0.0; m]; s]; s];
    }
    let h_mean = model.conditional_mean();
    (0..s)
        .map(|a| (0..s).map(|b| sub(model.x_value(a, b), &h_mean[a])).collect())
        .collect()
}

/// Values of `P_0(X_l)` as a function of `(xi_{-1}, xi_0)`.
pub fn projection_values(model: &MarkovProcessModel, l: i64) -> PairTable {
    let s = model.states();
    let m = model.components();
    if l >= 0 {
        let mut cur = model.conditional_mean();
        for _ in 0..l {
            cur = model.apply(&cur);
        }
        let next = model.apply(&cur);
        difference_table(&cur, &next)
    } else if l == -1 {
        lookahead_table(model)
    } else {
        vec![vec![vec![0.0; m]; s]; s]
    }
}

/// `d_0 = sum_l P_0(X_l) = G^(xi_0) - (P G^)(xi_{-1}) + h(xi_{-1}, xi_0) - H(xi_{-1})`.
pub fn d0_table(model: &MarkovProcessModel) -> Result<PairTable> {
    let gh = model.poisson_solution()?;
    let pgh = model.apply(&gh);
    let mut d = difference_table(&gh, &pgh);
    let look = lookahead_table(model);
    for (row, lrow) in d.iter_mut().zip(&look) {
        for (v, lv) in row.iter_mut().zip(lrow) {
            add_into(v, lv);
        }
    }
    Ok(d)
}

/// Exact projection and conditional-expectation norms up to lag `max_lag`.
pub fn conditional_norms(model: &MarkovProcessModel, p: f64, max_lag: usize) -> Result<ProjectionTable> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p = {p} must be a finite number >= 1")));
    }
    if max_lag < 1 {
        return Err(Error::InvalidParameter("max_lag must be at least 1".into()));
    }
    let s = model.states();
    let m = model.components();
    let zero_pairs: PairTable = vec![vec![vec![0.0; m]; s]; s];
    let look = lookahead_table(model);

    let mut forward = Vec::with_capacity(max_lag + 1);
    let mut conditional_mean = Vec::with_capacity(max_lag + 1);
    let mut cur = model.conditional_mean();
    for _ in 0..=max_lag {
        let next = model.apply(&cur);
        forward.push(pair_norm(model, &difference_table(&cur, &next), p));
        conditional_mean.push(state_norm(model, &cur, p));
        cur = next;
    }
    let mut backward = vec![0.0; max_lag + 1];
    backward[0] = forward[0];
    backward[1] = pair_norm(model, &look, p);
    let mut past_residual = vec![0.0; max_lag + 1];
    // X_0 - E_0(X_0) = h(xi_0, xi_1) - H(xi_0): same law as the look-ahead part
    past_residual[0] = backward[1];
    debug_assert!(pair_norm(model, &zero_pairs, p) == 0.0);

    Ok(ProjectionTable {
        p,
        max_lag,
        adapted: model.is_adapted(),
        forward,
        backward,
        conditional_mean,
        past_residual,
        d0: d0_table(model)?,
        poisson_solution: model.poisson_solution()?,
    })
}

/// `max_a | E(d_0 | xi_{-1} = a) |_m`.
pub fn martingale_defect(model: &MarkovProcessModel, d0: &PairTable) -> f64 {
    let m = model.components();
    model
        .transition()
        .iter()
        .zip(d0)
        .map(|(row, drow)| {
            let mut acc = vec![0.0; m];
            for (&w, v) in row.iter().zip(drow) {
                for (o, x) in acc.iter_mut().zip(v) {
                    *o += w * x;
                }
            }
            acc.iter().map(|x| x * x).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

/// `E(d_0 d_0^T)`.
pub fn d0_covariance(model: &MarkovProcessModel, d0: &PairTable) -> Vec<Vec<f64>> {
    let m = model.components();
    let mut out = vec![vec![0.0; m]; m];
    for (a, b, w) in pair_weights(model) {
        let v = &d0[a][b];
        for i in 0..m {
            for j in 0..m {
                out[i][j] += w * v[i] * v[j];
            }
        }
    }
    out
}

/// `E< P_i(X_a), P_j(X_b) >` over the exact joint law of the chain.
pub fn projection_inner_product(model: &MarkovProcessModel, i: i64, a: i64, j: i64, b: i64) -> f64 {
    let (i, a, j, b) = if i <= j { (i, a, j, b) } else { (j, b, i, a) };
    let u = projection_values(model, a - i);
    let v = projection_values(model, b - j);
    let s = model.states();
    let pi = model.stationary();
    let p = model.transition();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    if i == j {
        return pair_weights(model).map(|(x, y, w)| w * dot(&u[x][y], &v[x][y])).sum();
    }
    // law of (xi_{i-1}, xi_i, xi_{j-1}, xi_j): pi(x) P(x,y) P^{j-1-i}(y,z) P(z,w)
    let gap = (j - 1 - i) as usize;
    let mut power: Vec<Vec<f64>> = (0..s)
        .map(|r| (0..s).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..gap {
        power = power
            .iter()
            .map(|row| (0..s).map(|c| (0..s).map(|k| row[k] * p[k][c]).sum()).collect())
            .collect();
    }
    let mut total = 0.0;
    for x in 0..s {
        for y in 0..s {
            let wxy = pi[x] * p[x][y];
            if wxy == 0.0 {
                continue;
            }
            for z in 0..s {
                for w in 0..s {
                    let wt = wxy * power[y][z] * p[z][w];
                    if wt != 0.0 {
                        total += wt * dot(&u[x][y], &v[z][w]);
                    }
                }
            }
        }
    }
    total
}

/// Long-run covariance `sum_k Cov(X_0, X_k)` by direct summation of the
/// autocovariances with matrix powers, independent of the Poisson solution.
pub fn chain_long_run_covariance(model: &MarkovProcessModel) -> Vec<Vec<f64>> {
    let s = model.states();
    let m = model.components();
    let pi = model.stationary();
    let p = model.transition();
    let weight = |a: usize, b: usize| {
        if model.is_adapted() {
            if a == b {
                pi[a]
            } else {
                0.0
            }
        } else {
            pi[a] * p[a][b]
        }
    };
    let mut sigma = vec![vec![0.0; m]; m];
    for a in 0..s {
        for b in 0..s {
            let w = weight(a, b);
            let x = model.x_value(a, b);
            for i in 0..m {
                for j in 0..m {
                    sigma[i][j] += w * x[i] * x[j];
                }
            }
        }
    }
    let scale = sigma
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    // E(X_k | xi_1 = b) for the non-adapted case, E(X_k | xi_0 = a) otherwise
    let mut ahead = model.conditional_mean();
    if model.is_adapted() {
        ahead = model.apply(&ahead);
    }
    let mut quiet = 0;
    for _ in 1..1_000_000 {
        let mut ck = vec![vec![0.0; m]; m];
        for a in 0..s {
            for b in 0..s {
                let w = weight(a, b);
                if w == 0.0 {
                    continue;
                }
                let x = model.x_value(a, b);
                let y = if model.is_adapted() { &ahead[a] } else { &ahead[b] };
                for i in 0..m {
                    for j in 0..m {
                        ck[i][j] += w * x[i] * y[j];
                    }
                }
            }
        }
        let size = ck.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for i in 0..m {
            for j in 0..m {
                sigma[i][j] += ck[i][j] + ck[j][i];
            }
        }
        quiet = if size < 1e-18 * scale { quiet + 1 } else { 0 };
        if quiet >= 8 {
            break;
        }
        ahead = model.apply(&ahead);
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::super::model::Observable;
    use super::*;

    fn three_state() -> MarkovProcessModel {
        MarkovProcessModel::centered(
            vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3], vec![0.3, 0.3, 0.4]],
            Observable::adapted_scalar(&[1.0, -2.0, 0.5]),
        )
        .unwrap()
    }

    fn non_adapted() -> MarkovProcessModel {
        MarkovProcessModel::centered(
            vec![vec![0.7, 0.3], vec![0.4, 0.6]],
            Observable::non_adapted_scalar(&[vec![1.0, -1.0], vec![0.5, 2.0]]),
        )
        .unwrap()
    }

    #[test]
    fn flip_chain_closed_form() {
        let a = 0.2;
        let m = MarkovProcessModel::two_state_flip(a).unwrap();
        let t = conditional_norms(&m, 2.0, 20).unwrap();
        for n in 0..=20 {
            assert!((t.conditional_mean[n] - (1.0 - 2.0 * a).powi(n as i32)).abs() < 1e-14);
        }
        assert!(t.past_residual.iter().all(|&v| v == 0.0));
        assert!(t.backward[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn iid_chain_only_lag_zero() {
        let m = MarkovProcessModel::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            Observable::adapted_scalar(&[1.0, -1.0]),
        )
        .unwrap();
        let t = conditional_norms(&m, 2.0, 10).unwrap();
        assert!((t.forward[0] - 1.0).abs() < 1e-15);
        assert!(t.forward[1..].iter().all(|&v| v == 0.0));
        assert!(t.conditional_mean[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_adapted_has_future_dependence() {
        let m = non_adapted();
        let t = conditional_norms(&m, 2.0, 10).unwrap();
        assert!(t.past_residual[0] > 0.1);
        assert!(t.backward[1] > 0.1);
        assert!(t.past_residual[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn d0_is_a_martingale_difference_with_the_right_variance() {
        for m in [
            three_state(),
            non_adapted(),
            MarkovProcessModel::two_state_flip(0.05).unwrap(),
        ] {
            let d0 = d0_table(&m).unwrap();
            assert!(martingale_defect(&m, &d0) < 1e-12);
            let v = d0_covariance(&m, &d0)[0][0];
            let sigma2 = chain_long_run_covariance(&m)[0][0];
            assert!((v - sigma2).abs() < 1e-8 * sigma2.max(1.0), "{v} {sigma2}");
        }
        // flip chain: sigma^2 = (1 + r)/(1 - r), r = 1 - 2a
        let a = 0.3;
        let r = 1.0 - 2.0 * a;
        let sigma2 = chain_long_run_covariance(&MarkovProcessModel::two_state_flip(a).unwrap())[0][0];
        assert!((sigma2 - (1.0 + r) / (1.0 - r)).abs() < 1e-12);
    }

    #[test]
    fn d0_is_the_sum_of_projections() {
        for m in [three_state(), non_adapted()] {
            let d0 = d0_table(&m).unwrap();
            let s = m.states();
            let mut acc = vec![vec![0.0; s]; s];
            for l in -3..200 {
                let v = projection_values(&m, l);
                for a in 0..s {
                    for b in 0..s {
                        acc[a][b] += v[a][b][0];
                    }
                }
            }
            for a in 0..s {
                for b in 0..s {
                    assert!((acc[a][b] - d0[a][b][0]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn projections_are_orthogonal() {
        for m in [three_state(), non_adapted()] {
            for (i, a, j, b) in [(0, 0, 1, 0), (0, 2, 3, 2), (1, -1, 2, 3), (-2, 0, 0, 1), (0, 1, 5, 4)] {
                let v = projection_inner_product(&m, i, a, j, b);
                assert!(v.abs() < 1e-14, "{i} {a} {j} {b}: {v}");
            }
            assert!(projection_inner_product(&m, 0, 0, 0, 0) > 0.0);
        }
    }
}
