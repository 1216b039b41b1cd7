// Exact correlations through the dual lattice action and the resulting
// long-run variance.

use toral_lab::correlation::{variance_series, variance_series_with, SeriesOptions};
use toral_lab::fourier::FourierFunction;
use toral_lab::torus::AutoMatrix;

fn main() -> toral_lab::Result<()> {
    let cat = AutoMatrix::from_rows(&[vec![2, 1], vec![1, 1]])?;

    let single = FourierFunction::cosine_pair(&[1, 0], 1.0)?;
    let rep = variance_series(&single, &cat)?;
    println!(
        "2 cos(2 pi x): sigma^2 = {}, zero from lag {:?}",
        rep.sigma2.unwrap(),
        rep.termination_n0
    );

    // (1,0) -> (2,1) -> (5,3) under the transpose, so three lags correlate
    let chain = FourierFunction::cosine_modes(2, &[(vec![1, 0], 1.0), (vec![2, 1], 0.5), (vec![5, 3], 0.25)])?;
    let rep = variance_series_with(
        &chain,
        &cat,
        SeriesOptions {
            profile_max_log2: 10,
            ..Default::default()
        },
    )?;
    println!("\nthree-mode function:");
    for n in 0..4 {
        println!("  Cov(f, f o T^{n}) = {}", rep.scalar_at(n));
    }
    println!("  sigma^2 = {} (certified: {})", rep.sigma2.unwrap(), rep.certified);
    for (n, v) in &rep.partial_variances {
        println!("  Var(S_{n})/{n} = {:.12}", v[0][0]);
    }

    // vector-valued: two observables on disjoint dual orbits
    let pair = FourierFunction::stack(&[
        FourierFunction::cosine_pair(&[1, 0], 1.0)?,
        FourierFunction::cosine_modes(2, &[(vec![0, 1], 1.0), (vec![1, 1], 1.0)])?,
    ])?;
    let rep = variance_series(&pair, &cat)?;
    println!("\nstacked observable: Sigma = {:?}", rep.sigma);
    Ok(())
}
