// Coefficient families, tail sums and the tail conditions they satisfy.
//
// The lacunary family separates the logarithmic `q`-tail condition (which
// it satisfies with `theta = gamma - 1`) from every polynomial one.

use num_bigint::BigUint;
use toral_lab::fourier::{
    fit_constant, lacunary, leonov, tail_sum, truncate, verify_condition, TailConditionSpec, TailShape,
};

fn main() -> toral_lab::Result<()> {
    let (p, gamma) = (3.0, 2.5);
    let q = p / (p - 1.0);
    let f = lacunary(2, gamma, q, 24)?;
    println!("lacunary gamma = {gamma}, q = {q}");
    for r in [4u32, 16, 64, 256, 1024] {
        let b = BigUint::from(1u32) << r;
        println!(
            "  b = 2^{r:<5} q-tail {:.6e}   2-tail {:.6e}",
            tail_sum(&f, q, &b)?,
            tail_sum(&f, 2.0, &b)?
        );
    }

    let grid: Vec<BigUint> = [8u32, 32, 128, 512, 2048]
        .iter()
        .map(|&r| BigUint::from(1u32) << r)
        .collect();
    let log_spec = TailConditionSpec::new(q, TailShape::LogPower { theta: gamma - 1.0 }, 1.0, Some(p))?;
    let r = fit_constant(&f, &log_spec, 4096)?;
    let log_spec = TailConditionSpec {
        constant_r: r,
        ..log_spec
    };
    let rep = verify_condition(&f, &log_spec, &grid)?;
    println!(
        "  log-power condition, R = {r:.4}: holds everywhere = {}, fitted exponent {:.3}",
        rep.all_hold(),
        rep.fitted_exponent.unwrap()
    );
    let poly_spec = TailConditionSpec::new(q, TailShape::Polynomial { zeta: 0.25 }, 1.0, Some(p))?;
    let r = fit_constant(&f, &poly_spec, 4096)?;
    let rep = verify_condition(
        &f,
        &TailConditionSpec {
            constant_r: r,
            ..poly_spec
        },
        &grid,
    )?;
    println!(
        "  polynomial condition zeta = 0.25, R = {r:.4}: holds = {:?}",
        rep.holds
    );

    let g = leonov(2, 1.0, 1.5, q, 16)?;
    println!(
        "\nproduct family, radius 16: {} coefficients, ||f||^2 = {:.6}",
        g.component(0).len(),
        g.l2_norm_sq()
    );
    for m in [1u64, 2, 4, 8, 16] {
        let gm = truncate(&g, m);
        println!(
            "  m = {m:<3} ||f - f_m||^2 = {:.6e}  (tail sum {:.6e})",
            g.l2_norm_sq() - gm.l2_norm_sq(),
            tail_sum(&g, 2.0, &BigUint::from(m + 1))?
        );
    }
    Ok(())
}
