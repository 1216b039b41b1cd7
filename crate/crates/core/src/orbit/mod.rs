//! Exact-arithmetic torus orbits and partial-sum path ensembles.
//!
//! Starting points are uniform on the grid `(1/Q) Z^d` and orbits are
//! iterated as `x -> S x mod Q`, which is a bijection of the grid because
//! `det S = ±1`. Nothing is iterated in floating point.

mod format;
pub mod modq;
mod point;
pub mod rng;

pub use format::{read_ensemble, write_ensemble, ENSEMBLE_MAGIC, ENSEMBLE_VERSION};
pub use modq::{is_prime_u64, ModQ, MERSENNE_61};
pub use point::{CompiledObservable, ExactTorusPoint, ModMatrix};

use crate::error::{Error, Result};
use crate::fourier::FourierFunction;
use crate::torus::{classify, AutoMatrix};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub paths: usize,
    pub length: usize,
    pub modulus: u64,
    pub seed: u64,
    /// Upper bound on the memory held by the partial sums, in MB.
    pub budget_mb: u64,
}

impl SimulationConfig {
    pub fn new(paths: usize, length: usize, seed: u64) -> Self {
        SimulationConfig {
            paths,
            length,
            modulus: MERSENNE_61,
            seed,
            budget_mb: 2048,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub dim: usize,
    pub components: usize,
    pub paths: usize,
    pub length: usize,
    pub modulus: u64,
    pub master_seed: u64,
}

/// `M` partial-sum paths `S_0 = 0, S_1, ..., S_N` of an R^m-valued observable.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    pub meta: EnsembleMeta,
    pub seeds: Vec<u64>,
    /// Row-major `[path][k][component]`.
    data: Vec<f64>,
}

impl PathEnsemble {
    pub fn from_parts(meta: EnsembleMeta, seeds: Vec<u64>, data: Vec<f64>) -> Result<Self> {
        let expected = meta.paths * (meta.length + 1) * meta.components;
        if data.len() != expected || seeds.len() != meta.paths {
            return Err(Error::BadEnsemble(format!(
                "expected {expected} values and {} seeds, got {} and {}",
                meta.paths,
                data.len(),
                seeds.len()
            )));
        }
        Ok(PathEnsemble { meta, seeds, data })
    }

    /// Synthetic ensemble from explicit increments `[path][k][component]`
    /// (k = 1..=N), used for self-calibration of the statistical tests.
    pub fn from_increments(components: usize, paths: usize, length: usize, increments: &[f64]) -> Self {
        assert_eq!(increments.len(), paths * length * components);
        let row = (length + 1) * components;
        let mut data = vec![0.0; paths * row];
        for p in 0..paths {
            for k in 1..=length {
                for c in 0..components {
                    data[p * row + k * components + c] =
                        data[p * row + (k - 1) * components + c] + increments[(p * length + k - 1) * components + c];
                }
            }
        }
        PathEnsemble {
            meta: EnsembleMeta {
                dim: 0,
                components,
                paths,
                length,
                modulus: 0,
                master_seed: 0,
            },
            seeds: vec![0; paths],
            data,
        }
    }

    pub fn paths(&self) -> usize {
        self.meta.paths
    }

    pub fn length(&self) -> usize {
        self.meta.length
    }

    pub fn components(&self) -> usize {
        self.meta.components
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    /// `S_k` of path `p`, component `c`.
    #[inline]
    pub fn partial_sum(&self, p: usize, k: usize, c: usize) -> f64 {
        let m = self.meta.components;
        self.data[(p * (self.meta.length + 1) + k) * m + c]
    }

    /// Component `c` of path `p` as a slice-free iterator over `S_0..=S_N`.
    pub fn path(&self, p: usize, c: usize) -> impl Iterator<Item = f64> + '_ {
        (0..=self.meta.length).map(move |k| self.partial_sum(p, k, c))
    }

    /// `S_n` for every path, component `c`.
    pub fn endpoint_samples(&self, n: usize, c: usize) -> Vec<f64> {
        (0..self.meta.paths).map(|p| self.partial_sum(p, n, c)).collect()
    }

    /// `X_k = S_k - S_{k-1}`.
    pub fn increment(&self, p: usize, k: usize, c: usize) -> f64 {
        self.partial_sum(p, k, c) - self.partial_sum(p, k - 1, c)
    }

    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let m = self.meta.components;
        let mut out = String::from("path,k");
        for c in 0..m {
            let _ = write!(out, ",s{c}");
        }
        out.push('\n');
        for p in 0..self.meta.paths {
            for k in 0..=self.meta.length {
                let _ = write!(out, "{p},{k}");
                for c in 0..m {
                    let _ = write!(out, ",{}", self.partial_sum(p, k, c));
                }
                out.push('\n');
            }
        }
        out
    }
}

struct Sampler {
    matrix: ModMatrix,
    observable: CompiledObservable,
    dim: usize,
    length: usize,
}

impl Sampler {
    fn fill_path(&self, seed: u64, out: &mut [f64]) {
        let m = self.observable.components();
        let q = self.matrix.modulus();
        let mut rng = rng::path_rng(seed);
        let mut x: Vec<u64> = (0..self.dim).map(|_| rng.random_range(0..q)).collect();
        let mut scratch = Vec::with_capacity(self.dim);
        let mut value = vec![0.0; m];
        out[..m].fill(0.0);
        for k in 1..=self.length {
            self.matrix.step(&mut x, &mut scratch);
            self.observable.evaluate_into(&x, &mut value);
            for c in 0..m {
                out[k * m + c] = out[(k - 1) * m + c] + value[c];
            }
        }
    }
}

fn validate(s: &AutoMatrix, f: &FourierFunction, cfg: &SimulationConfig) -> Result<()> {
    if s.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: f.dim(),
        });
    }
    if cfg.paths == 0 || cfg.length == 0 {
        return Err(Error::InvalidParameter("need at least one path of length >= 1".into()));
    }
    if cfg.modulus >= 1 << 62 || !is_prime_u64(cfg.modulus) {
        return Err(Error::InvalidParameter(format!(
            "modulus {} must be a prime below 2^62",
            cfg.modulus
        )));
    }
    let bytes = cfg.paths as u128 * (cfg.length as u128 + 1) * f.component_count() as u128 * 8;
    let need_mb = bytes.div_ceil(1 << 20) as u64;
    if need_mb > cfg.budget_mb {
        return Err(Error::BudgetExceeded {
            need_mb,
            budget_mb: cfg.budget_mb,
        });
    }
    Ok(())
}

/// Whether `S` is known to be ergodic; simulations of non-ergodic maps are
/// allowed but their statistics are not meaningful against the theory.
pub fn ergodicity_warning(s: &AutoMatrix) -> Option<String> {
    match classify(s) {
        Ok(c) if !c.ergodic => Some(format!(
            "automorphism is not ergodic (Phi_{} divides the characteristic polynomial)",
            c.cyclotomic_witness.unwrap_or(0)
        )),
        _ => None,
    }
}

/// Simulate `M` exact orbits and their partial sums. The result depends
/// only on `(S, f, Q, M, N, seed)`, not on the number of worker threads.
pub fn sample_paths(s: &AutoMatrix, f: &FourierFunction, cfg: &SimulationConfig) -> Result<PathEnsemble> {
    validate(s, f, cfg)?;
    let sampler = Sampler {
        matrix: ModMatrix::new(s, cfg.modulus),
        observable: CompiledObservable::new(f, cfg.modulus)?,
        dim: s.dim(),
        length: cfg.length,
    };
    let m = f.component_count();
    let row = (cfg.length + 1) * m;
    let seeds: Vec<u64> = (0..cfg.paths as u64).map(|i| rng::path_seed(cfg.seed, i)).collect();
    let mut data = vec![0.0; cfg.paths * row];
    data.par_chunks_mut(row)
        .zip(seeds.par_iter())
        .for_each(|(out, &seed)| sampler.fill_path(seed, out));
    Ok(PathEnsemble {
        meta: EnsembleMeta {
            dim: s.dim(),
            components: m,
            paths: cfg.paths,
            length: cfg.length,
            modulus: cfg.modulus,
            master_seed: cfg.seed,
        },
        seeds,
        data,
    })
}

/// Recompute a single path from its recorded seed.
pub fn regenerate_path(
    s: &AutoMatrix,
    f: &FourierFunction,
    modulus: u64,
    length: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let sampler = Sampler {
        matrix: ModMatrix::new(s, modulus),
        observable: CompiledObservable::new(f, modulus)?,
        dim: s.dim(),
        length,
    };
    let mut out = vec![0.0; (length + 1) * f.component_count()];
    sampler.fill_path(seed, &mut out);
    Ok(out)
}

/// Starting point of a path (before the first application of `S`).
pub fn start_point(dim: usize, modulus: u64, seed: u64) -> ExactTorusPoint {
    let mut rng = rng::path_rng(seed);
    ExactTorusPoint {
        numerators: (0..dim).map(|_| rng.random_range(0..modulus)).collect(),
        modulus,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffReport {
    pub length: usize,
    pub max_abs_mean: f64,
    pub threshold: f64,
    pub flagged_paths: Vec<usize>,
}

/// Ergodic-average sanity check: `max_p |S_N / N|`, flagging paths above
/// `5 sigma N^{-1/2} sqrt(2 log log N)`.
pub fn birkhoff_check(ens: &PathEnsemble, sigma2: f64) -> Result<BirkhoffReport> {
    let n = ens.length();
    if n < 1 << 10 {
        return Err(Error::InvalidParameter(format!(
            "Birkhoff check needs N >= 1024, got {n}"
        )));
    }
    let nf = n as f64;
    let threshold = 5.0 * sigma2.max(0.0).sqrt() / nf.sqrt() * (2.0 * nf.ln().ln()).sqrt();
    let mut max_abs_mean: f64 = 0.0;
    let mut flagged_paths = Vec::new();
    for p in 0..ens.paths() {
        let worst = (0..ens.components())
            .map(|c| (ens.partial_sum(p, n, c) / nf).abs())
            .fold(0.0, f64::max);
        max_abs_mean = max_abs_mean.max(worst);
        if worst > threshold {
            flagged_paths.push(p);
        }
    }
    Ok(BirkhoffReport {
        length: n,
        max_abs_mean,
        threshold,
        flagged_paths,
    })
}
