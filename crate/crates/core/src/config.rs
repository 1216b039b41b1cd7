//! Declarative experiment configuration (TOML). Every domain restriction is
//! checked when the file is parsed, so downstream stages never see an
//! invalid parameter.

use crate::error::{Error, Result};
use crate::fourier::{self, FourierFunction, TailConditionSpec, TailShape};
use crate::martingale::{MarkovProcessModel, Observable};
use crate::orbit::{is_prime_u64, SimulationConfig, MERSENNE_61};
use crate::torus::AutoMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Tolerance for the relation `q = p/(p-1)`.
pub const CONJUGATE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub martingale: Option<MartingaleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub rows: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    /// `sum_j a_j (e(<k_j, x>) + e(-<k_j, x>))`
    Cosine { modes: Vec<Vec<i64>>, amplitudes: Vec<f64> },
    Lacunary {
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<f64>,
        levels: u32,
    },
    Leonov {
        a: f64,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<f64>,
        radius: i64,
    },
    /// Coefficients from a JSON file, relative to the config file.
    Explicit { path: PathBuf },
    /// R^m-valued observable from scalar parts.
    Stack { components: Vec<FunctionConfig> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionShape {
    LogPower,
    Polynomial,
    LeonovProduct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummedPower {
    /// `|c_k|^q`
    Q,
    /// `|c_k|^2`
    Two,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsConfig {
    pub shape: ConditionShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub power: SummedPower,
    /// Fitted over `b <= 4096` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_r: Option<f64>,
    /// The grid `b = 2^r`.
    pub b_log2: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub paths: usize,
    pub length: usize,
    /// Mandatory: there is no clock-based default.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_mb: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestSpec {
    Clt {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        level: Option<f64>,
    },
    Donsker {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        level: Option<f64>,
    },
    Lil {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slack: Option<f64>,
    },
    Covariance {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        se_multiplier: Option<f64>,
    },
    VarianceGrowth {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        se_multiplier: Option<f64>,
    },
    Birkhoff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateValues {
    Scalar(Vec<f64>),
    Vector(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairValues {
    Scalar(Vec<Vec<f64>>),
    Vector(Vec<Vec<Vec<f64>>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleConfig {
    pub transition: Vec<Vec<f64>>,
    /// Adapted observable `g(xi_0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<StateValues>,
    /// Observable `h(xi_0, xi_1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<PairValues>,
    /// Subtract the stationary mean from the observable.
    #[serde(default)]
    pub center: bool,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    /// `n = 2^lo, ..., 2^hi`
    #[serde(default = "default_grid")]
    pub grid_log2: [u32; 2],
    #[serde(default = "default_mc_paths")]
    pub paths: usize,
    pub seed: u64,
}

fn default_p() -> f64 {
    2.0
}
fn default_max_lag() -> usize {
    512
}
fn default_grid() -> [u32; 2] {
    [4, 10]
}
fn default_mc_paths() -> usize {
    10_000
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// `q` from `p` and/or `q`, with `p in (2, 4]` and `q = p/(p-1)`.
pub fn resolve_exponent(p: Option<f64>, q: Option<f64>) -> Result<f64> {
    match (p, q) {
        (None, None) => cfg_err("one of p or q is required"),
        (Some(p), q) => {
            if !(p > 2.0 && p <= 4.0) {
                return cfg_err(format!("p must lie in (2, 4], got {p}"));
            }
            let conj = p / (p - 1.0);
            match q {
                Some(q) if (q - conj).abs() > CONJUGATE_TOL => {
                    cfg_err(format!("q = {q} conflicts with p = {p}: expected p/(p-1) = {conj}"))
                }
                _ => Ok(conj),
            }
        }
        (None, Some(q)) => {
            // q = p/(p-1) with p in (2, 4] means q in [4/3, 2)
            if !(4.0 / 3.0 - CONJUGATE_TOL..2.0).contains(&q) {
                return cfg_err(format!(
                    "q must lie in [4/3, 2) so that p = q/(q-1) lies in (2, 4], got {q}"
                ));
            }
            Ok(q)
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = &self.matrix {
            AutoMatrix::from_rows(&m.rows)?;
        }
        if let Some(f) = &self.function {
            validate_function(f)?;
            if self.matrix.is_none() {
                return cfg_err("[function] needs a [matrix] section");
            }
        }
        if let Some(c) = &self.correlation {
            if c.horizon.is_some_and(|h| h < 1) {
                return cfg_err("correlation horizon must be positive");
            }
        }
        if let Some(c) = &self.conditions {
            self.condition_spec(c)?;
            if c.b_log2.is_empty() || c.b_log2[0] < 1 || c.b_log2.windows(2).any(|w| w[0] >= w[1]) {
                return cfg_err("conditions.b_log2 must be non-empty, increasing and >= 1");
            }
        }
        if let Some(s) = &self.simulation {
            if s.paths == 0 || s.length == 0 {
                return cfg_err("simulation needs paths >= 1 and length >= 1");
            }
            let q = s.modulus.unwrap_or(MERSENNE_61);
            if q >= 1 << 62 || !is_prime_u64(q) {
                return cfg_err(format!("modulus {q} must be a prime below 2^62"));
            }
            if self.function.is_none() {
                return cfg_err("[simulation] needs a [function] section");
            }
        }
        for t in &self.tests {
            match t {
                TestSpec::Clt { level, .. } | TestSpec::Donsker { level, .. } => {
                    if level.is_some_and(|l| !(l > 0.0 && l < 1.0)) {
                        return cfg_err("test level must lie in (0, 1)");
                    }
                }
                TestSpec::Lil { slack } if slack.is_some_and(|s| !(s >= 0.0)) => {
                    return cfg_err("LIL slack must be non-negative");
                }
                TestSpec::Covariance { se_multiplier, .. } | TestSpec::VarianceGrowth { se_multiplier }
                    if se_multiplier.is_some_and(|s| !(s > 0.0)) =>
                {
                    return cfg_err("se_multiplier must be positive");
                }
                _ => {}
            }
        }
        if let Some(m) = &self.martingale {
            self.markov_model()?;
            if !(m.p >= 1.0) || !m.p.is_finite() {
                return cfg_err(format!("martingale p must be >= 1, got {}", m.p));
            }
            if m.max_lag < crate::martingale::MIN_LAGS {
                return cfg_err(format!(
                    "martingale max_lag must be at least {}",
                    crate::martingale::MIN_LAGS
                ));
            }
            let [lo, hi] = m.grid_log2;
            if lo < 1 || lo > hi || hi > 20 {
                return cfg_err("martingale grid_log2 must satisfy 1 <= lo <= hi <= 20");
            }
            if m.paths < crate::martingale::MIN_MONTE_CARLO_PATHS {
                return cfg_err(format!(
                    "martingale paths must be at least {}",
                    crate::martingale::MIN_MONTE_CARLO_PATHS
                ));
            }
        }
        if self.output.formats.is_empty() {
            return cfg_err("output.formats must list at least one format");
        }
        Ok(())
    }

    pub fn automorphism(&self) -> Result<AutoMatrix> {
        match &self.matrix {
            Some(m) => AutoMatrix::from_rows(&m.rows),
            None => cfg_err("this command needs a [matrix] section"),
        }
    }

    /// The observable as declared (lacunary families keep their rule).
    pub fn observable(&self, base_dir: &Path) -> Result<FourierFunction> {
        let dim = self.automorphism()?.dim();
        match &self.function {
            Some(f) => build_function(f, dim, base_dir),
            None => cfg_err("this command needs a [function] section"),
        }
    }

    /// The observable with finite support, for correlation and simulation.
    pub fn finite_observable(&self, base_dir: &Path) -> Result<FourierFunction> {
        let f = self.observable(base_dir)?;
        Ok(match f.family() {
            Some(fam) if !fam.is_finite() => fourier::truncate(&f, f.support_radius().max(0) as u64),
            _ => f,
        })
    }

    pub fn simulation_config(&self) -> Result<SimulationConfig> {
        let s = match &self.simulation {
            Some(s) => s,
            None => return cfg_err("this command needs a [simulation] section"),
        };
        let mut cfg = SimulationConfig::new(s.paths, s.length, s.seed);
        if let Some(q) = s.modulus {
            cfg.modulus = q;
        }
        if let Some(b) = s.budget_mb {
            cfg.budget_mb = b;
        }
        Ok(cfg)
    }

    /// Exponent `q` of the function family, when it has one.
    pub fn family_exponent(&self) -> Option<f64> {
        match &self.function {
            Some(FunctionConfig::Lacunary { p, q, .. }) | Some(FunctionConfig::Leonov { p, q, .. }) => {
                resolve_exponent(*p, *q).ok()
            }
            _ => None,
        }
    }

    pub fn condition_spec(&self, c: &ConditionsConfig) -> Result<TailConditionSpec> {
        let (fam_a, fam_alpha) = match &self.function {
            Some(FunctionConfig::Leonov { a, alpha, .. }) => (Some(*a), Some(*alpha)),
            _ => (None, None),
        };
        let shape = match c.shape {
            ConditionShape::LogPower => TailShape::LogPower {
                theta: c
                    .theta
                    .ok_or_else(|| Error::Config("log_power shape needs theta".into()))?,
            },
            ConditionShape::Polynomial => TailShape::Polynomial {
                zeta: c
                    .zeta
                    .ok_or_else(|| Error::Config("polynomial shape needs zeta".into()))?,
            },
            ConditionShape::LeonovProduct => TailShape::LeonovProduct {
                a: c.a
                    .or(fam_a)
                    .ok_or_else(|| Error::Config("leonov_product shape needs a".into()))?,
                alpha: c
                    .alpha
                    .or(fam_alpha)
                    .ok_or_else(|| Error::Config("leonov_product shape needs alpha".into()))?,
            },
        };
        let q = self.family_exponent();
        let exponent = match c.power {
            SummedPower::Two => 2.0,
            SummedPower::Q => q.ok_or_else(|| Error::Config("power = \"q\" needs a family with p or q".into()))?,
        };
        let p = q.map(|q| q / (q - 1.0));
        TailConditionSpec::new(exponent, shape, c.constant_r.unwrap_or(1.0), p)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn markov_model(&self) -> Result<MarkovProcessModel> {
        let m = match &self.martingale {
            Some(m) => m,
            None => return cfg_err("this command needs a [martingale] section"),
        };
        let observable = match (&m.g, &m.h) {
            (Some(g), None) => Observable::Adapted {
                g: match g {
                    StateValues::Scalar(v) => v.iter().map(|&x| vec![x]).collect(),
                    StateValues::Vector(v) => v.clone(),
                },
            },
            (None, Some(h)) => Observable::NonAdapted {
                h: match h {
                    PairValues::Scalar(v) => v.iter().map(|r| r.iter().map(|&x| vec![x]).collect()).collect(),
                    PairValues::Vector(v) => v.clone(),
                },
            },
            _ => return cfg_err("martingale needs exactly one of g or h"),
        };
        let model = if m.center {
            MarkovProcessModel::centered(m.transition.clone(), observable)
        } else {
            MarkovProcessModel::new(m.transition.clone(), observable)
        };
        model.map_err(|e| Error::Config(e.to_string()))
    }
}

fn validate_function(f: &FunctionConfig) -> Result<()> {
    match f {
        FunctionConfig::Cosine { modes, amplitudes } => {
            if modes.is_empty() || modes.len() != amplitudes.len() {
                return cfg_err("cosine family needs as many amplitudes as modes (at least one)");
            }
        }
        FunctionConfig::Lacunary { gamma, p, q, levels } => {
            resolve_exponent(*p, *q)?;
            if !(*gamma > 1.0) {
                return cfg_err(format!("lacunary family needs gamma > 1, got {gamma}"));
            }
            if !(1..=59).contains(levels) {
                return cfg_err(format!("lacunary levels must lie in 1..=59, got {levels}"));
            }
        }
        FunctionConfig::Leonov { a, alpha, p, q, radius } => {
            resolve_exponent(*p, *q)?;
            if !(*alpha > 1.0) {
                return cfg_err(format!("Leonov family needs alpha > 1, got {alpha}"));
            }
            if !(*a > 0.0) {
                return cfg_err(format!("Leonov family needs A > 0, got {a}"));
            }
            if *radius < 1 {
                return cfg_err("Leonov radius must be at least 1");
            }
        }
        FunctionConfig::Explicit { .. } => {}
        FunctionConfig::Stack { components } => {
            if components.is_empty() {
                return cfg_err("stack needs at least one component");
            }
            for c in components {
                if matches!(c, FunctionConfig::Stack { .. }) {
                    return cfg_err("stacks cannot be nested");
                }
                validate_function(c)?;
            }
        }
    }
    Ok(())
}

fn build_function(f: &FunctionConfig, dim: usize, base_dir: &Path) -> Result<FourierFunction> {
    let out = match f {
        FunctionConfig::Cosine { modes, amplitudes } => {
            let pairs: Vec<(Vec<i64>, f64)> = modes.iter().cloned().zip(amplitudes.iter().copied()).collect();
            if modes.iter().any(|k| k.len() != dim) {
                return cfg_err(format!("cosine modes must have {dim} entries"));
            }
            FourierFunction::cosine_modes(dim, &pairs)?
        }
        FunctionConfig::Lacunary { gamma, p, q, levels } => {
            fourier::lacunary(dim, *gamma, resolve_exponent(*p, *q)?, *levels)?
        }
        FunctionConfig::Leonov { a, alpha, p, q, radius } => {
            fourier::leonov(dim, *a, *alpha, resolve_exponent(*p, *q)?, *radius)?
        }
        FunctionConfig::Explicit { path } => {
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| Error::Config(format!("cannot read coefficients {}: {e}", full.display())))?;
            let f = FourierFunction::from_json(&text)?;
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: f.dim(),
                });
            }
            f
        }
        FunctionConfig::Stack { components } => {
            let parts = components
                .iter()
                .map(|c| {
                    let g = build_function(c, dim, base_dir)?;
                    Ok(match g.family() {
                        Some(fam) if !fam.is_finite() => fourier::truncate(&g, g.support_radius().max(0) as u64),
                        _ => g,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            FourierFunction::stack(&parts)?
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[matrix]
rows = [[2, 1], [1, 1]]

[function]
family = "cosine"
modes = [[1, 0]]
amplitudes = [1.0]

[simulation]
paths = 100
length = 64
seed = 3

[[tests]]
name = "clt"

[[tests]]
name = "lil"
slack = 0.5

[martingale]
transition = [[0.7, 0.3], [0.4, 0.6]]
h = [[1.0, -1.0], [0.5, 2.0]]
center = true
seed = 1
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml_str(FULL).unwrap();
        assert_eq!(c.tests.len(), 2);
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        assert_eq!(c.hash().len(), 64);
        assert!(!c.markov_model().unwrap().is_adapted());
    }

    #[test]
    fn exponent_resolution() {
        assert!((resolve_exponent(Some(3.0), None).unwrap() - 1.5).abs() < 1e-15);
        assert!(resolve_exponent(Some(3.0), Some(1.5)).is_ok());
        assert!(resolve_exponent(Some(3.0), Some(1.5 + 1e-9)).is_err());
        assert!(resolve_exponent(Some(2.0), None).is_err());
        assert!(resolve_exponent(Some(4.5), None).is_err());
        assert!(resolve_exponent(None, Some(1.2)).is_err());
        assert!(resolve_exponent(None, None).is_err());
    }

    #[test]
    fn domain_errors_at_parse_time() {
        let bad = [
            "[matrix]\nrows = [[2, 0], [0, 1]]\n",
            "[matrix]\nrows = [[2, 1], [1, 1]]\n[function]\nfamily = \"lacunary\"\ngamma = 0.9\np = 3.0\nlevels = 10\n",
            "[matrix]\nrows = [[2, 1], [1, 1]]\n[function]\nfamily = \"leonov\"\na = 1.0\nalpha = 1.0\np = 3.0\nradius = 4\n",
            "[matrix]\nrows = [[2, 1], [1, 1]]\n[function]\nfamily = \"lacunary\"\ngamma = 2.0\np = 3.0\nq = 1.4\nlevels = 10\n",
            "[matrix]\nrows = [[2, 1], [1, 1]]\n[function]\nfamily = \"lacunary\"\ngamma = 2.0\np = 3.0\nlevels = 10\n[conditions]\nshape = \"log_power\"\ntheta = 1.0\npower = \"q\"\nb_log2 = [8, 16]\n",
            "[matrix]\nrows = [[2, 1], [1, 1]]\n[function]\nfamily = \"lacunary\"\ngamma = 2.0\np = 3.0\nlevels = 10\n[conditions]\nshape = \"polynomial\"\nzeta = 0.0\npower = \"two\"\nb_log2 = [8, 16]\n",
            "[matrix]\nrows = [[2, 1], [1, 1]]\n[function]\nfamily = \"cosine\"\nmodes = [[1, 0]]\namplitudes = [1.0]\n[simulation]\npaths = 1\nlength = 1\n",
            "[martingale]\ntransition = [[0.0, 1.0], [1.0, 0.0]]\ng = [1.0, -1.0]\nseed = 1\n",
            "[matrix]\nrows = [[2, 1], [1, 1]]\nunknown = 3\n",
        ];
        for text in bad {
            assert!(
                matches!(
                    ExperimentConfig::from_toml_str(text),
                    Err(Error::Config(_)) | Err(Error::NotUnimodular(_))
                ),
                "accepted: {text}"
            );
        }
    }

    #[test]
    fn lacunary_is_truncated_for_simulation() {
        let text =
            "[matrix]\nrows = [[2, 1], [1, 1]]\n[function]\nfamily = \"lacunary\"\ngamma = 2.0\nq = 1.5\nlevels = 12\n";
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        let f = c.finite_observable(Path::new(".")).unwrap();
        assert!(f.family().is_none());
        assert_eq!(f.support_radius(), 1 << 12);
    }
}
