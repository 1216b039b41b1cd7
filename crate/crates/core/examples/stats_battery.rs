// Statistical battery on a simulated ensemble, with a deliberately wrong
// variance as a negative control.

use toral_lab::correlation::variance_series;
use toral_lab::fourier::FourierFunction;
use toral_lab::orbit::{sample_paths, SimulationConfig};
use toral_lab::stats::{clt_test, donsker_functionals, variance_growth_at, ReportBundle};
use toral_lab::torus::AutoMatrix;

fn main() -> toral_lab::Result<()> {
    let cat = AutoMatrix::from_rows(&[vec![2, 1], vec![1, 1]])?;
    let f = FourierFunction::cosine_modes(2, &[(vec![1, 0], 1.0), (vec![2, 1], 0.5)])?;
    let exact = variance_series(&f, &cat)?;
    let sigma2 = exact.sigma2.unwrap();
    let n = 1024;
    let ens = sample_paths(&cat, &f, &SimulationConfig::new(4000, n, 7))?;

    let bundle = ReportBundle::new(vec![
        clt_test(&ens, sigma2, n)?,
        donsker_functionals(&ens, sigma2, n)?,
        variance_growth_at(&ens, &exact, &[64, 256, 1024])?,
        clt_test(&ens, sigma2 / 2.0, n)?,
    ]);
    println!("{}\n", bundle.header);
    print!("{}", bundle.to_csv());
    println!("\nsigma^2 = {sigma2}; the last row uses sigma^2 / 2 and must fail");
    Ok(())
}
