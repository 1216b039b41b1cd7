// Martingale-coboundary decomposition on small Markov chains, where every
// conditional expectation is a finite matrix computation.

use toral_lab::martingale::{
    chain_long_run_covariance, d0_covariance, d0_table, enumerate_decomposition, martingale_defect,
    verify_maximal_remainder, verify_remainder_bound, MarkovProcessModel, Observable,
};

fn main() -> toral_lab::Result<()> {
    let p = vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.3, 0.3, 0.4]];
    // X_0 = h(xi_0, xi_1) looks one step into the future
    let h = vec![vec![1.0, 0.0, -1.0], vec![0.3, 2.0, -0.7], vec![-1.5, 0.4, 0.9]];
    let model = MarkovProcessModel::centered(p, Observable::non_adapted_scalar(&h))?;
    println!("stationary law {:?}", model.stationary());

    let d0 = d0_table(&model)?;
    println!("max |E(d_0 | past)| = {:.2e}", martingale_defect(&model, &d0));
    println!(
        "E d_0^2 = {:.12}, long-run variance = {:.12}",
        d0_covariance(&model, &d0)[0][0],
        chain_long_run_covariance(&model)[0][0]
    );

    for n in [1, 4, 8] {
        let e = enumerate_decomposition(&model, 2.0, n)?;
        println!(
            "n = {n}: {} trajectories, max |S_n - M_n - R_n| = {:.1e}, ||R_n||_2 = {:.6}",
            e.trajectories, e.telescoping_defect, e.remainder_norm_exact
        );
    }

    let grid: Vec<usize> = (4..=10).map(|e| 1 << e).collect();
    let bound = verify_remainder_bound(&model, 3.0, &grid)?;
    println!(
        "\n||R_n||^p' <= C sum_k (tail_k)^p' with C = {:.4} (stable: {})",
        bound.fitted_constant, bound.stable
    );
    let max = verify_maximal_remainder(&model, 3.0, &grid, 10_000, 1)?;
    for (n, r) in grid.iter().zip(&max.ratios) {
        println!("  n = {n:<5} ||max_k |R_k|||_3 / n^(1/2) = {r:.5}");
    }
    println!("strictly decreasing from n = 64: {}", max.decreasing);
    Ok(())
}
