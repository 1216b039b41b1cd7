use super::family::Family;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

pub type Lattice = Vec<i64>;
pub type CoeffMap = BTreeMap<Lattice, Complex64>;

/// Relative tolerance for the Hermitian symmetry check `c_{-k} = conj(c_k)`.
const HERMITIAN_TOL: f64 = 1e-12;

/// A real-valued (or R^m-valued) observable given by its Fourier coefficients.
///
/// Finite-support functions are stored exactly. For a closed-form family
/// (see [`Family`]) the coefficient maps hold the materialized part of the
/// series and the family rule answers tail queries for the full series.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierFunction {
    dim: usize,
    components: Vec<CoeffMap>,
    family: Option<Family>,
}

/// JSON layout: `{"dim": d, "components": [[[k, re, im], ...], ...]}`.
#[derive(Serialize, Deserialize)]
struct FourierJson {
    dim: usize,
    components: Vec<Vec<(Lattice, f64, f64)>>,
}

impl FourierFunction {
    /// Scalar observable from an explicit coefficient map.
    pub fn new(dim: usize, coeffs: CoeffMap) -> Result<Self> {
        Self::vector(dim, vec![coeffs])
    }

    /// R^m-valued observable, one coefficient map per component.
    pub fn vector(dim: usize, components: Vec<CoeffMap>) -> Result<Self> {
        if dim == 0 || components.is_empty() {
            return Err(Error::InvalidParameter(
                "observable needs dim >= 1 and at least one component".into(),
            ));
        }
        let mut components = components;
        for comp in &mut components {
            comp.retain(|_, c| *c != Complex64::new(0.0, 0.0));
            validate(dim, comp)?;
        }
        Ok(FourierFunction {
            dim,
            components,
            family: None,
        })
    }

    pub(crate) fn with_family(mut self, family: Family) -> Self {
        self.family = Some(family);
        self
    }

    pub fn zero(dim: usize) -> Self {
        FourierFunction {
            dim,
            components: vec![CoeffMap::new()],
            family: None,
        }
    }

    /// `amplitude * (e(<k,x>) + e(-<k,x>)) = 2 amplitude cos(2 pi <k, x>)`.
    pub fn cosine_pair(k: &[i64], amplitude: f64) -> Result<Self> {
        let mut map = CoeffMap::new();
        let neg: Lattice = k.iter().map(|v| -v).collect();
        map.insert(k.to_vec(), Complex64::new(amplitude, 0.0));
        map.insert(neg, Complex64::new(amplitude, 0.0));
        Self::new(k.len(), map)
    }

    /// Real cosine series with the same real amplitude on every listed mode
    /// and its negative.
    pub fn cosine_modes(dim: usize, modes: &[(Lattice, f64)]) -> Result<Self> {
        let mut map = CoeffMap::new();
        for (k, a) in modes {
            let neg: Lattice = k.iter().map(|v| -v).collect();
            *map.entry(k.clone()).or_default() += Complex64::new(*a, 0.0);
            *map.entry(neg).or_default() += Complex64::new(*a, 0.0);
        }
        Self::new(dim, map)
    }

    /// Stack scalar observables into one R^m-valued observable.
    pub fn stack(parts: &[FourierFunction]) -> Result<Self> {
        let dim = parts.first().map(|p| p.dim).unwrap_or(0);
        if parts.iter().any(|p| p.dim != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: parts.iter().map(|p| p.dim).find(|&d| d != dim).unwrap(),
            });
        }
        Self::vector(dim, parts.iter().flat_map(|p| p.components.iter().cloned()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &CoeffMap {
        &self.components[i]
    }

    pub fn components(&self) -> &[CoeffMap] {
        &self.components
    }

    /// Scalar projection onto component `i`.
    pub fn scalar_component(&self, i: usize) -> FourierFunction {
        FourierFunction {
            dim: self.dim,
            components: vec![self.components[i].clone()],
            family: self.family.clone(),
        }
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn coefficient(&self, component: usize, k: &[i64]) -> Complex64 {
        self.components[component].get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_empty())
    }

    /// Largest sup-norm over the materialized support.
    pub fn support_radius(&self) -> i64 {
        self.components
            .iter()
            .flat_map(|c| c.keys())
            .map(|k| super::tail::sup_norm(k))
            .max()
            .unwrap_or(0)
    }

    /// `E(f_i f_j) = sum_k c_{k,i} conj(c_{k,j})`.
    pub fn inner_product(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.components[i], &self.components[j]);
        a.iter().filter_map(|(k, c)| b.get(k).map(|d| (c * d.conj()).re)).sum()
    }

    /// `||f||_2^2` for a scalar observable.
    pub fn l2_norm_sq(&self) -> f64 {
        self.inner_product(0, 0)
    }

    /// Value of component `i` at a torus point, through paired cosine/sine terms.
    pub fn evaluate_component(&self, i: usize, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = 0.0;
        for (k, c) in &self.components[i] {
            if !is_positive_half(k) {
                continue;
            }
            let phase = TAU * k.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum::<f64>();
            let (s, co) = phase.sin_cos();
            acc += 2.0 * (c.re * co - c.im * s);
        }
        acc
    }

    /// Scalar value at `x` (component 0).
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.evaluate_component(0, x)
    }

    pub fn evaluate_vector(&self, x: &[f64]) -> Vec<f64> {
        (0..self.components.len())
            .map(|i| self.evaluate_component(i, x))
            .collect()
    }

    /// Full complex sum `sum_k c_k e(<k, x>)`, without using the symmetry.
    pub fn evaluate_complex(&self, i: usize, x: &[f64]) -> Complex64 {
        self.components[i]
            .iter()
            .map(|(k, c)| {
                let phase = TAU * k.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum::<f64>();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        let j = FourierJson {
            dim: self.dim,
            components: self
                .components
                .iter()
                .map(|m| m.iter().map(|(k, c)| (k.clone(), c.re, c.im)).collect())
                .collect(),
        };
        serde_json::to_string(&j).expect("coefficient maps serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: FourierJson = serde_json::from_str(s)?;
        let comps = j
            .components
            .into_iter()
            .map(|entries| {
                let mut m = CoeffMap::new();
                for (k, re, im) in entries {
                    if k.len() != j.dim {
                        return Err(Error::DimensionMismatch {
                            expected: j.dim,
                            got: k.len(),
                        });
                    }
                    m.insert(k, Complex64::new(re, im));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::vector(j.dim, comps)
    }
}

/// `k` lies in the half-lattice whose first nonzero coordinate is positive.
pub(crate) fn is_positive_half(k: &[i64]) -> bool {
    k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
}

fn validate(dim: usize, map: &CoeffMap) -> Result<()> {
    for (k, c) in map {
        if k.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: k.len(),
            });
        }
        if k.iter().all(|&v| v == 0) {
            return Err(Error::NotCentered(c.to_string()));
        }
        let neg: Lattice = k.iter().map(|v| -v).collect();
        let partner = map.get(&neg).copied().unwrap_or_default();
        if (partner - c.conj()).norm() > HERMITIAN_TOL * c.norm().max(1e-300) {
            return Err(Error::NotHermitian(k.clone()));
        }
    }
    Ok(())
}

impl FourierFunction {
    /// Coefficients of `f ∘ U` for a unimodular `U`: `c'_{U^T k} = c_k`.
    pub fn compose_linear(&self, u: &crate::torus::AutoMatrix) -> Result<Self> {
        use num_traits::ToPrimitive;
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.dim(),
            });
        }
        let comps = self
            .components
            .iter()
            .map(|m| {
                m.iter()
                    .map(|(k, c)| {
                        let img = crate::torus::dual_iterate_i64(u, k, 1);
                        let img: Option<Lattice> = img.iter().map(|v| v.to_i64()).collect();
                        img.map(|k2| (k2, *c))
                            .ok_or_else(|| Error::InvalidParameter("image mode overflows i64".into()))
                    })
                    .collect::<Result<CoeffMap>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::vector(self.dim, comps)
    }
}
