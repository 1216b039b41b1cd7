use super::function::{CoeffMap, FourierFunction, Lattice};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Closed-form coefficient families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `|c_k| = l^{-gamma/q}` at `k = (±2^l, 0, ..., 0)`, `l >= 1`, realized
    /// as the sine series `c_k = -i l^{-gamma/q}`, `c_{-k} = +i l^{-gamma/q}`.
    /// `levels` is the number of materialized levels; the series itself is
    /// infinite.
    Lacunary {
        dim: usize,
        gamma: f64,
        q: f64,
        levels: u32,
    },
    /// `|c_k|^q = A prod_i 1 / ((1 + |k_i|) log^{1+alpha}(2 + |k_i|))`,
    /// `c_0 = 0`, truncated to `|k| <= radius`.
    Leonov {
        dim: usize,
        a: f64,
        alpha: f64,
        q: f64,
        radius: i64,
    },
}

impl Family {
    /// Magnitude rule `|c_k|` of the untruncated family.
    pub fn magnitude(&self, k: &[i64]) -> f64 {
        match *self {
            Family::Lacunary { gamma, q, .. } => match lacunary_level(k) {
                Some(l) => (l as f64).powf(-gamma / q),
                None => 0.0,
            },
            Family::Leonov { a, alpha, q, .. } => {
                if k.iter().all(|&v| v == 0) {
                    return 0.0;
                }
                leonov_weight(a, alpha, k).powf(1.0 / q)
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Family::Leonov { .. })
    }
}

/// `A prod_i 1/((1+|k_i|) log^{1+alpha}(2+|k_i|))`
pub(crate) fn leonov_weight(a: f64, alpha: f64, k: &[i64]) -> f64 {
    k.iter().fold(a, |acc, &v| {
        let t = v.unsigned_abs() as f64;
        acc / ((1.0 + t) * (2.0 + t).ln().powf(1.0 + alpha))
    })
}

/// Level `l` if `k = (±2^l, 0, ..., 0)` with `l >= 1`.
pub(crate) fn lacunary_level(k: &[i64]) -> Option<u32> {
    let (first, rest) = k.split_first()?;
    if rest.iter().any(|&v| v != 0) {
        return None;
    }
    let a = first.unsigned_abs();
    (a.is_power_of_two() && a >= 2).then(|| a.trailing_zeros())
}

/// The lacunary sine series with `levels` materialized levels (`2^levels`
/// must fit in i64).
pub fn lacunary(dim: usize, gamma: f64, q: f64, levels: u32) -> Result<FourierFunction> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lacunary family needs gamma > 1, got {gamma}"
        )));
    }
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (1, 2], got {q}")));
    }
    if levels > 62 || dim == 0 {
        return Err(Error::InvalidParameter(format!(
            "lacunary family supports dim >= 1 and at most 62 levels, got dim {dim}, {levels} levels"
        )));
    }
    let map = lacunary_levels(dim, gamma, q, 1..=levels);
    Ok(FourierFunction::new(dim, map)?.with_family(Family::Lacunary { dim, gamma, q, levels }))
}

/// Coefficient map of the lacunary sine series restricted to `levels`.
pub fn lacunary_levels(dim: usize, gamma: f64, q: f64, levels: impl IntoIterator<Item = u32>) -> CoeffMap {
    let mut map = CoeffMap::new();
    for l in levels {
        let mag = (l as f64).powf(-gamma / q);
        let mut k: Lattice = vec![0; dim];
        k[0] = 1i64 << l;
        map.insert(k.clone(), Complex64::new(0.0, -mag));
        k[0] = -k[0];
        map.insert(k, Complex64::new(0.0, mag));
    }
    map
}

/// Extremal instance of the coefficient-wise product condition, as a real
/// cosine series truncated to sup-norm radius `radius`.
pub fn leonov(dim: usize, a: f64, alpha: f64, q: f64, radius: i64) -> Result<FourierFunction> {
    if !(alpha > 1.0) || !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "product family needs A > 0 and alpha > 1, got A = {a}, alpha = {alpha}"
        )));
    }
    if !(q > 1.0 && q <= 2.0) || radius < 1 || dim == 0 {
        return Err(Error::InvalidParameter(format!(
            "product family needs q in (1, 2], radius >= 1, dim >= 1 (q = {q}, radius = {radius})"
        )));
    }
    let mut map = CoeffMap::new();
    let side = (2 * radius + 1) as usize;
    let total = side
        .checked_pow(dim as u32)
        .filter(|&t| t <= 50_000_000)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "radius {radius} in dimension {dim} is too large to materialize"
            ))
        })?;
    for idx in 0..total {
        let mut rem = idx;
        let k: Lattice = (0..dim)
            .map(|_| {
                let v = (rem % side) as i64 - radius;
                rem /= side;
                v
            })
            .collect();
        if k.iter().all(|&v| v == 0) {
            continue;
        }
        let c = leonov_weight(a, alpha, &k).powf(1.0 / q);
        map.insert(k, Complex64::new(c, 0.0));
    }
    Ok(FourierFunction::new(dim, map)?.with_family(Family::Leonov {
        dim,
        a,
        alpha,
        q,
        radius,
    }))
}
