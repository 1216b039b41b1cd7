//! Binary ensemble layout: the 4-byte magic `TIPL`, then little-endian u64
//! fields `version, d, m, M, N, Q, seed`, then the partial sums as
//! little-endian f64 in row-major `[path][k][component]` order.

use super::{rng, EnsembleMeta, PathEnsemble};
use crate::error::{Error, Result};
use std::io::{Read, Write};

pub const ENSEMBLE_MAGIC: &[u8; 4] = b"TIPL";
pub const ENSEMBLE_VERSION: u64 = 1;

pub fn write_ensemble<W: Write>(ens: &PathEnsemble, mut w: W) -> Result<()> {
    w.write_all(ENSEMBLE_MAGIC)?;
    let m = &ens.meta;
    for v in [
        ENSEMBLE_VERSION,
        m.dim as u64,
        m.components as u64,
        m.paths as u64,
        m.length as u64,
        m.modulus,
        m.master_seed,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(ens.raw().len() * 8);
    for x in ens.raw() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_ensemble<R: Read>(mut r: R) -> Result<PathEnsemble> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::BadEnsemble("truncated header".into()))?;
    if &magic != ENSEMBLE_MAGIC {
        return Err(Error::BadEnsemble(format!("bad magic {magic:?}")));
    }
    let mut fields = [0u64; 7];
    for f in fields.iter_mut() {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)
            .map_err(|_| Error::BadEnsemble("truncated header".into()))?;
        *f = u64::from_le_bytes(b);
    }
    let [version, dim, components, paths, length, modulus, master_seed] = fields;
    if version != ENSEMBLE_VERSION {
        return Err(Error::BadEnsemble(format!("unsupported version {version}")));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let expected = paths
        .checked_mul(length + 1)
        .and_then(|v| v.checked_mul(components))
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| Error::BadEnsemble("header sizes overflow".into()))?;
    if bytes.len() as u64 != expected {
        return Err(Error::BadEnsemble(format!(
            "payload has {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let seeds = (0..paths).map(|i| rng::path_seed(master_seed, i)).collect();
    PathEnsemble::from_parts(
        EnsembleMeta {
            dim: dim as usize,
            components: components as usize,
            paths: paths as usize,
            length: length as usize,
            modulus,
            master_seed,
        },
        seeds,
        data,
    )
}
