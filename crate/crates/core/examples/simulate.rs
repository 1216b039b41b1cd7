// Exact orbit simulation, the binary ensemble format and path
// regeneration from a recorded seed.

use toral_lab::fourier::FourierFunction;
use toral_lab::orbit::{
    birkhoff_check, read_ensemble, regenerate_path, sample_paths, write_ensemble, SimulationConfig,
};
use toral_lab::torus::AutoMatrix;

fn main() -> toral_lab::Result<()> {
    let cat = AutoMatrix::from_rows(&[vec![2, 1], vec![1, 1]])?;
    let f = FourierFunction::cosine_pair(&[1, 0], 1.0)?;
    let cfg = SimulationConfig::new(2000, 2048, 42);
    let ens = sample_paths(&cat, &f, &cfg)?;
    println!(
        "{} paths of length {} modulo {}",
        ens.paths(),
        ens.length(),
        cfg.modulus
    );

    let ends = ens.endpoint_samples(2048, 0);
    let mean = ends.iter().sum::<f64>() / ends.len() as f64;
    let var = ends.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (ends.len() - 1) as f64;
    println!("Var(S_N)/N = {:.4} (exact long-run variance 2)", var / 2048.0);

    let birk = birkhoff_check(&ens, 2.0)?;
    println!(
        "max |S_N/N| = {:.4}, threshold {:.4}, flagged {}",
        birk.max_abs_mean,
        birk.threshold,
        birk.flagged_paths.len()
    );

    let mut bytes = Vec::new();
    write_ensemble(&ens, &mut bytes)?;
    let back = read_ensemble(bytes.as_slice())?;
    assert_eq!(back, ens);
    println!("round trip through {} bytes", bytes.len());

    let again = regenerate_path(&cat, &f, cfg.modulus, cfg.length, ens.seeds[17])?;
    assert!(again.iter().zip(ens.path(17, 0)).all(|(a, b)| *a == b));
    println!("path 17 regenerated bit for bit from seed {:#018x}", ens.seeds[17]);
    Ok(())
}
