// Decide ergodicity and hyperbolicity of a few toral automorphisms.
//
// ```text
// cargo run --example classify
// ```

use toral_lab::torus::{classify, AutoMatrix};

fn main() -> toral_lab::Result<()> {
    let rotation = AutoMatrix::companion(&[1, 0, 1])?; // x^2 + 1
    let cat = AutoMatrix::from_rows(&[vec![2, 1], vec![1, 1]])?;
    let catalog = [
        ("identity", AutoMatrix::identity(2)),
        ("swap", AutoMatrix::from_rows(&[vec![0, 1], vec![1, 0]])?),
        ("cat map", cat.clone()),
        ("fibonacci", AutoMatrix::from_rows(&[vec![0, 1], vec![1, 1]])?),
        ("cat (+) rotation", AutoMatrix::block_diag(&cat, &rotation)),
        // x^3 - x - 1: one real root outside the circle, a complex pair inside
        ("3d pisot", AutoMatrix::companion(&[-1, -1, 0, 1])?),
        // Salem quartic x^4 - x^3 - x^2 - x + 1: roots on the unit circle
        // that are not roots of unity
        ("salem", AutoMatrix::companion(&[1, -1, -1, -1, 1])?),
    ];
    println!(
        "{:<18} {:<28} {:>8} {:>11} {:>8}",
        "matrix", "char poly", "ergodic", "hyperbolic", "witness"
    );
    for (name, m) in &catalog {
        let c = classify(m)?;
        let witness = c.cyclotomic_witness.map_or("-".to_string(), |w| format!("Phi_{w}"));
        println!(
            "{name:<18} {:<28} {:>8} {:>11} {witness:>8}",
            m.charpoly().to_string(),
            c.ergodic,
            c.hyperbolic
        );
        if let (true, Some((re, im))) = (c.ergodic, c.unit_circle_witness) {
            println!("{:>18} eigenvalue on the circle: {re:.6} {im:+.6}i", "");
        }
    }
    Ok(())
}
