use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tolerance for stochasticity, stationarity and centering.
pub const MODEL_TOL: f64 = 1e-12;

/// Values indexed by state, each in R^m.
pub type StateTable = Vec<Vec<f64>>;

/// `X_0 = g(xi_0)` or `X_0 = h(xi_0, xi_1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    Adapted { g: StateTable },
    NonAdapted { h: Vec<StateTable> },
}

impl Observable {
    /// Scalar adapted observable.
    pub fn adapted_scalar(g: &[f64]) -> Self {
        Observable::Adapted {
            g: g.iter().map(|&v| vec![v]).collect(),
        }
    }

    /// Scalar observable of the current and the next state.
    pub fn non_adapted_scalar(h: &[Vec<f64>]) -> Self {
        Observable::NonAdapted {
            h: h.iter().map(|row| row.iter().map(|&v| vec![v]).collect()).collect(),
        }
    }

    fn components(&self) -> usize {
        match self {
            Observable::Adapted { g } => g.first().map_or(0, Vec::len),
            Observable::NonAdapted { h } => h.first().and_then(|r| r.first()).map_or(0, Vec::len),
        }
    }
}

/// A stationary finite-state Markov chain `(xi_i)` with an R^m-valued
/// observable; the filtration is generated by the past of the chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovProcessModel {
    transition: Vec<Vec<f64>>,
    stationary: Vec<f64>,
    observable: Observable,
}

fn primitive(p: &[Vec<f64>]) -> bool {
    // Wielandt: a primitive s x s matrix has P^k > 0 for k = (s-1)^2 + 1
    let s = p.len();
    let mut reach: Vec<Vec<bool>> = p.iter().map(|r| r.iter().map(|&v| v > 0.0).collect()).collect();
    let base = reach.clone();
    for _ in 1..(s - 1) * (s - 1) + 1 {
        let mut next = vec![vec![false; s]; s];
        for i in 0..s {
            for k in 0..s {
                if reach[i][k] {
                    for j in 0..s {
                        next[i][j] |= base[k][j];
                    }
                }
            }
        }
        reach = next;
    }
    reach.iter().flatten().all(|&b| b)
}

fn solve_stationary(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
    let s = p.len();
    let mut a = DMatrix::<f64>::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            a[(i, j)] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    let mut b = DVector::<f64>::zeros(s);
    for j in 0..s {
        a[(s - 1, j)] = 1.0;
    }
    b[s - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidModel("stationary distribution is not unique".into()))?;
    Ok(pi.iter().copied().collect())
}

impl MarkovProcessModel {
    /// Build a model, solving for the stationary law.
    pub fn new(transition: Vec<Vec<f64>>, observable: Observable) -> Result<Self> {
        Self::check_transition(&transition)?;
        let stationary = solve_stationary(&transition)?;
        Self::with_stationary(transition, stationary, observable)
    }

    /// Build a model with a supplied stationary law, which is validated.
    pub fn with_stationary(transition: Vec<Vec<f64>>, stationary: Vec<f64>, observable: Observable) -> Result<Self> {
        Self::check_transition(&transition)?;
        let s = transition.len();
        if stationary.len() != s {
            return Err(Error::InvalidModel(format!(
                "stationary law has {} entries, expected {s}",
                stationary.len()
            )));
        }
        for j in 0..s {
            let v: f64 = (0..s).map(|i| stationary[i] * transition[i][j]).sum();
            if (v - stationary[j]).abs() > MODEL_TOL {
                return Err(Error::InvalidModel(format!(
                    "pi P differs from pi at state {j} by {:e}",
                    v - stationary[j]
                )));
            }
        }
        if (stationary.iter().sum::<f64>() - 1.0).abs() > MODEL_TOL || stationary.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidModel("stationary law is not a probability vector".into()));
        }
        let m = observable.components();
        let shape_ok = match &observable {
            Observable::Adapted { g } => g.len() == s && g.iter().all(|v| v.len() == m),
            Observable::NonAdapted { h } => {
                h.len() == s && h.iter().all(|r| r.len() == s && r.iter().all(|v| v.len() == m))
            }
        };
        if m == 0 || !shape_ok {
            return Err(Error::InvalidModel("observable table has the wrong shape".into()));
        }
        let model = MarkovProcessModel {
            transition,
            stationary,
            observable,
        };
        let mean = model.stationary_mean();
        if mean.iter().any(|v| v.abs() >= MODEL_TOL) {
            return Err(Error::InvalidModel(format!("observable is not centred: mean {mean:?}")));
        }
        Ok(model)
    }

    /// Like [`MarkovProcessModel::new`] but subtracts the stationary mean
    /// from the observable first.
    pub fn centered(transition: Vec<Vec<f64>>, observable: Observable) -> Result<Self> {
        Self::check_transition(&transition)?;
        let pi = solve_stationary(&transition)?;
        let raw = MarkovProcessModel {
            transition: transition.clone(),
            stationary: pi.clone(),
            observable: observable.clone(),
        };
        let mean = raw.stationary_mean();
        let shift = |v: &Vec<f64>| v.iter().zip(&mean).map(|(a, b)| a - b).collect::<Vec<f64>>();
        let observable = match observable {
            Observable::Adapted { g } => Observable::Adapted {
                g: g.iter().map(shift).collect(),
            },
            Observable::NonAdapted { h } => Observable::NonAdapted {
                h: h.iter().map(|r| r.iter().map(shift).collect()).collect(),
            },
        };
        Self::with_stationary(transition, pi, observable)
    }

    fn check_transition(p: &[Vec<f64>]) -> Result<()> {
        let s = p.len();
        if s == 0 || p.iter().any(|r| r.len() != s) {
            return Err(Error::InvalidModel(
                "transition matrix must be square and non-empty".into(),
            ));
        }
        for (i, r) in p.iter().enumerate() {
            if r.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "row {i} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > MODEL_TOL {
                return Err(Error::InvalidModel(format!("row {i} sums to {sum}")));
            }
        }
        if !primitive(p) {
            return Err(Error::InvalidModel("chain is reducible or periodic".into()));
        }
        Ok(())
    }

    /// Symmetric two-state chain flipping with probability `a`, `g = (+1, -1)`.
    pub fn two_state_flip(a: f64) -> Result<Self> {
        Self::new(
            vec![vec![1.0 - a, a], vec![a, 1.0 - a]],
            Observable::adapted_scalar(&[1.0, -1.0]),
        )
    }

    pub fn states(&self) -> usize {
        self.transition.len()
    }

    pub fn components(&self) -> usize {
        self.observable.components()
    }

    pub fn is_adapted(&self) -> bool {
        matches!(self.observable, Observable::Adapted { .. })
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    /// `X_i` when `xi_i = a` and `xi_{i+1} = b`.
    pub fn x_value(&self, a: usize, b: usize) -> &[f64] {
        match &self.observable {
            Observable::Adapted { g } => &g[a],
            Observable::NonAdapted { h } => &h[a][b],
        }
    }

    /// `(P v)(a) = sum_b P(a, b) v(b)`.
    pub fn apply(&self, v: &StateTable) -> StateTable {
        let m = v.first().map_or(0, Vec::len);
        self.transition
            .iter()
            .map(|row| {
                let mut out = vec![0.0; m];
                for (p, vb) in row.iter().zip(v) {
                    for (o, x) in out.iter_mut().zip(vb) {
                        *o += p * x;
                    }
                }
                out
            })
            .collect()
    }

    /// `G(a) = E(X_0 | xi_0 = a)`: `g` itself, or `sum_b P(a,b) h(a,b)`.
    pub fn conditional_mean(&self) -> StateTable {
        let s = self.states();
        let m = self.components();
        (0..s)
            .map(|a| {
                let mut out = vec![0.0; m];
                for b in 0..s {
                    let w = if self.is_adapted() {
                        if a == b {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        self.transition[a][b]
                    };
                    for (o, x) in out.iter_mut().zip(self.x_value(a, b)) {
                        *o += w * x;
                    }
                }
                out
            })
            .collect()
    }

    pub fn stationary_mean(&self) -> Vec<f64> {
        let g = self.conditional_mean();
        let mut mean = vec![0.0; self.components()];
        for (pa, ga) in self.stationary.iter().zip(&g) {
            for (o, x) in mean.iter_mut().zip(ga) {
                *o += pa * x;
            }
        }
        mean
    }

    /// Solution `G^` of `(I - P) G^ = G` with `pi G^ = 0`, through the
    /// fundamental matrix `(I - P + 1 pi)^{-1}`.
    pub fn poisson_solution(&self) -> Result<StateTable> {
        let s = self.states();
        let m = self.components();
        let mut z = DMatrix::<f64>::zeros(s, s);
        for i in 0..s {
            for j in 0..s {
                z[(i, j)] = if i == j { 1.0 } else { 0.0 } - self.transition[i][j] + self.stationary[j];
            }
        }
        let g = self.conditional_mean();
        let rhs = DMatrix::from_fn(s, m, |i, c| g[i][c]);
        let sol = z
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidModel("fundamental matrix is singular".into()))?;
        Ok((0..s).map(|i| (0..m).map(|c| sol[(i, c)]).collect()).collect())
    }

    /// Draw `xi_0` from `pi`.
    pub fn sample_stationary<R: Rng>(&self, rng: &mut R) -> usize {
        sample_row(&self.stationary, rng)
    }

    pub fn sample_next<R: Rng>(&self, state: usize, rng: &mut R) -> usize {
        sample_row(&self.transition[state], rng)
    }
}

fn sample_row<R: Rng>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // round-off in the cumulative sum: last state with positive mass
    row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// `(E |v|_m^p)^{1/p}` for values with probabilities `w`.
pub fn lp_norm<'a, I>(items: I, p: f64) -> f64
where
    I: IntoIterator<Item = (f64, &'a [f64])>,
{
    let mut acc = 0.0;
    for (w, v) in items {
        let e = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if w > 0.0 && e > 0.0 {
            acc += w * e.powf(p);
        }
    }
    acc.powf(1.0 / p)
}
