//! Acceptance suite. Runs every criterion in order, prints one
//! `criterion N: PASS|FAIL` line each and exits non-zero if any failed.

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;
use toral_lab::correlation::{correlation, variance_series, variance_series_with, CorrelationReport, SeriesOptions};
use toral_lab::fourier::{fit_constant, lacunary, leonov, tail_sum, truncate, verify_condition};
use toral_lab::fourier::{CoeffMap, FourierFunction, TailConditionSpec, TailShape};
use toral_lab::martingale::{
    check_summability, conditional_norms, d0_table, enumerate_decomposition, martingale_defect,
    verify_maximal_remainder, verify_remainder_bound, Condition, MarkovProcessModel, Observable, ProjectionTable,
    SummabilityVerdict,
};
use toral_lab::orbit::{sample_paths, PathEnsemble, SimulationConfig};
use toral_lab::stats::{clt_test, donsker_functionals, lil_statistics, variance_growth_at, Verdict};
use toral_lab::torus::{classify, AutoMatrix};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn cat_map() -> AutoMatrix {
    AutoMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap()
}

fn single_cosine() -> FourierFunction {
    FourierFunction::cosine_pair(&[1, 0], 1.0).unwrap()
}

// 10^4 cat-map paths of length 2^12 for the single cosine, shared by the
// CLT and Donsker criteria.
fn cosine_ensemble() -> &'static PathEnsemble {
    static ENS: OnceLock<PathEnsemble> = OnceLock::new();
    ENS.get_or_init(|| {
        sample_paths(
            &cat_map(),
            &single_cosine(),
            &SimulationConfig::new(10_000, 1 << 12, 2024),
        )
        .unwrap()
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn ergodicity_catalog() -> Outcome {
    let start = Instant::now();
    let identity = classify(&AutoMatrix::identity(3)).unwrap();
    ensure(!identity.ergodic, "identity classified ergodic")?;

    let mut perms = 0;
    for d in 1..=5 {
        for p in permutations(d) {
            let rows: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| (p[i] == j) as i64).collect()).collect();
            let c = classify(&AutoMatrix::from_rows(&rows).unwrap()).unwrap();
            ensure(!c.ergodic, format!("permutation {p:?} classified ergodic"))?;
            perms += 1;
        }
    }

    for rows in [[[2, 1], [1, 1]], [[0, 1], [1, 1]]] {
        let m = AutoMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        let c = classify(&m).unwrap();
        ensure(
            c.ergodic && c.hyperbolic,
            format!("{rows:?} should be ergodic and hyperbolic"),
        )?;
    }

    // x^2 + 1 = Phi_4
    let rotation = AutoMatrix::companion(&[1, 0, 1]).unwrap();
    let block = classify(&AutoMatrix::block_diag(&cat_map(), &rotation)).unwrap();
    ensure(
        !block.ergodic && block.cyclotomic_witness == Some(4),
        format!(
            "block diagonal: ergodic {}, witness {:?}",
            block.ergodic, block.cyclotomic_witness
        ),
    )?;

    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 1.0, format!("catalog took {elapsed:.2} s"))?;
    Ok(format!(
        "{perms} permutation matrices, witness 4 on the block matrix, {elapsed:.3} s"
    ))
}

fn exact_single_cosine() -> Outcome {
    let (s, f) = (cat_map(), single_cosine());
    for n in (-60..=60).filter(|&n| n != 0) {
        let c = correlation(&f, &f, &s, n).unwrap();
        ensure(c == 0.0, format!("correlation at lag {n} is {c}"))?;
    }
    let rep = variance_series(&f, &s).unwrap();
    let sigma2 = rep.sigma2.unwrap();
    ensure((sigma2 - 2.0).abs() <= 1e-12, format!("sigma^2 = {sigma2}"))?;
    ensure(
        rep.termination_n0 == Some(1) && rep.certified,
        "termination not certified at lag 1",
    )?;
    for n in [1u64, 2, 7, 64, 4096] {
        let v = rep.variance_profile(n)[0][0];
        ensure((v - 2.0).abs() <= 1e-12, format!("profile at n = {n} is {v}"))?;
    }
    Ok(format!(
        "sigma^2 = {sigma2}, correlations vanish at every lag in [-60, 60] \\ {{0}}"
    ))
}

// Lattice oracle: for real coefficients on a symmetric support,
// Cov(f, f∘T^n) = sum of c_k c_j over pairs with k = (S^T)^n j.
fn lattice_correlation(coeffs: &CoeffMap, st: [[i64; 2]; 2], st_inv: [[i64; 2]; 2], n: i64) -> f64 {
    let step = if n >= 0 { st } else { st_inv };
    let mut total = 0.0;
    for (j, cj) in coeffs {
        let mut v = [j[0], j[1]];
        for _ in 0..n.abs() {
            v = [
                step[0][0] * v[0] + step[0][1] * v[1],
                step[1][0] * v[0] + step[1][1] * v[1],
            ];
        }
        if let Some(ck) = coeffs.get(&v.to_vec()) {
            total += ck.re * cj.re;
        }
    }
    total
}

fn variance_convergence() -> Outcome {
    let start = Instant::now();
    let s = cat_map();
    // modes along one dual orbit: (1,0) -> (2,1) -> (5,3)
    let f = FourierFunction::cosine_modes(2, &[(vec![1, 0], 1.0), (vec![2, 1], 0.5), (vec![5, 3], 0.25)]).unwrap();
    let rep: CorrelationReport = variance_series_with(
        &f,
        &s,
        SeriesOptions {
            profile_max_log2: 10,
            ..Default::default()
        },
    )
    .unwrap();
    let n0 = rep.termination_n0.unwrap_or(0);
    ensure(n0 >= 3, format!("termination at {n0}, expected at least 3"))?;

    let st = [[2, 1], [1, 1]];
    let st_inv = [[1, -1], [-1, 2]];
    let r: Vec<f64> = (0..=n0 + 2)
        .map(|n| lattice_correlation(f.component(0), st, st_inv, n))
        .collect();
    for n in 0..=n0 + 2 {
        ensure(
            (rep.scalar_at(n) - r[n as usize]).abs() <= 1e-15,
            format!("lag {n}: engine {} vs lattice {}", rep.scalar_at(n), r[n as usize]),
        )?;
        ensure(
            (lattice_correlation(f.component(0), st, st_inv, -n) - r[n as usize]).abs() <= 1e-15,
            format!("lag -{n} differs from lag {n}"),
        )?;
    }
    let sigma2: f64 = r[0] + 2.0 * r[1..].iter().sum::<f64>();
    ensure(
        (rep.sigma2.unwrap() - sigma2).abs() <= 1e-12,
        "sigma^2 differs from the lattice sum",
    )?;
    let first_moment: f64 = (1..r.len()).map(|k| k as f64 * r[k]).sum();

    let mut worst: f64 = 0.0;
    for n in (1..=80u64).chain([256, 1024]) {
        // direct double sum of Cov(X_i, X_j)
        let mut direct = 0.0;
        for i in 0..n as i64 {
            for j in 0..n as i64 {
                direct += r.get((i - j).unsigned_abs() as usize).copied().unwrap_or(0.0);
            }
        }
        direct /= n as f64;
        let exact = rep.variance_profile(n)[0][0];
        worst = worst.max((exact - direct).abs());
        if n >= n0 as u64 {
            // sigma^2 (1 - O(n0/n)) with the exact first-moment correction
            let shape = sigma2 - 2.0 * first_moment / n as f64;
            ensure((exact - shape).abs() <= 1e-12, format!("n = {n}: {exact} vs {shape}"))?;
        }
    }
    ensure(worst <= 1e-12, format!("profile vs direct summation: {worst:e}"))?;

    let ens = sample_paths(&s, &f, &SimulationConfig::new(10_000, 1 << 10, 99)).unwrap();
    let test = variance_growth_at(&ens, &rep, &[1 << 6, 1 << 8, 1 << 10]).unwrap();
    ensure(
        test.verdict == Verdict::Pass,
        format!("empirical profile: {:?}", test.details),
    )?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 120.0, format!("took {elapsed:.1} s"))?;
    Ok(format!(
        "n0 = {n0}, sigma^2 = {sigma2}, max profile error {worst:.1e}, worst z = {:.2} ({elapsed:.1} s)",
        test.statistic
    ))
}

fn clt_marginal() -> Outcome {
    let start = Instant::now();
    let ens = cosine_ensemble();
    let good = clt_test(ens, 2.0, 1 << 12).unwrap();
    let bad = clt_test(ens, 1.0, 1 << 12).unwrap();
    let (pg, pb) = (good.p_value.unwrap(), bad.p_value.unwrap());
    ensure(pg > 0.01, format!("KS p = {pg} against N(0, 2)"))?;
    ensure(pb < 1e-6, format!("corrupted variance still gives p = {pb}"))?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 120.0, format!("took {elapsed:.1} s"))?;
    Ok(format!(
        "p = {pg:.3} at sigma^2 = 2, p = {pb:.1e} at sigma^2 = 1 ({elapsed:.1} s)"
    ))
}

fn donsker() -> Outcome {
    let r = donsker_functionals(cosine_ensemble(), 2.0, 1 << 12).unwrap();
    let (pmax, parc) = (r.details["max_p_value"], r.details["arcsine_p_value"]);
    ensure(pmax > 0.01, format!("running maximum p = {pmax}"))?;
    ensure(parc > 0.01, format!("occupation time p = {parc}"))?;
    Ok(format!("running maximum p = {pmax:.3}, occupation time p = {parc:.3}"))
}

fn lil_band() -> Outcome {
    let (paths, n) = (1000, 1 << 14);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let incs: Vec<f64> = (0..paths * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let ens = PathEnsemble::from_increments(1, paths, n, &incs);
    let mut stats = lil_statistics(&ens, 0, 1.0);
    stats.sort_by(f64::total_cmp);
    let p99 = toral_lab::numeric::quantile(&stats, 0.99);
    ensure(
        (0.8..=1.5).contains(&p99),
        format!("99th percentile {p99:.3} on iid Gaussians lies outside [0.8, 1.5]"),
    )?;
    Ok(format!("99th percentile {p99:.3}"))
}

// Analytic constant R with sum_{|k| >= b} |c_k|^2 <= R b^{-zeta}, zeta = 2/q - 1,
// for the two-dimensional product family of any radius.
fn product_tail_constant(a: f64, alpha: f64, q: f64) -> (f64, f64) {
    let t = 2.0 / q;
    let w = |k: f64| ((1.0 + k) * (2.0 + k).ln().powf(1.0 + alpha)).recip().powf(t);
    // full sum over Z, the part past J bounded by the integral of x^{-t}
    let cut = 1_000_000u64;
    let mut whole = w(0.0);
    for k in 1..=cut {
        whole += 2.0 * w(k as f64);
    }
    whole += 2.0 * (cut as f64).powf(1.0 - t) / (t - 1.0) * (2.0 + cut as f64).ln().powf(-t * (1.0 + alpha));
    // sum_{j >= b} (1+j)^{-t} log^{-t(1+alpha)}(2+j) <= log^{-t(1+alpha)}(3) b^{1-t} / (t-1)
    let one_axis = 2.0 * 3f64.ln().powf(-t * (1.0 + alpha)) / (t - 1.0);
    (a.powf(t) * 2.0 * one_axis * whole, t - 1.0)
}

fn parseval_truncation() -> Outcome {
    let (a, alpha, q, radius) = (1.0, 1.5, 4.0 / 3.0, 24);
    let f = leonov(2, a, alpha, q, radius).unwrap();
    let (r_const, zeta) = product_tail_constant(a, alpha, q);
    // grid quadrature is exact for trigonometric polynomials of degree < side/2
    let side = 2 * radius as usize + 2;
    let mut worst: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    for m in 1..=20u64 {
        let diff: CoeffMap = f
            .component(0)
            .iter()
            .filter(|(k, _)| k.iter().map(|v| v.abs()).max().unwrap() as u64 > m)
            .map(|(k, c)| (k.clone(), *c))
            .collect();
        let g = FourierFunction::new(2, diff).unwrap();
        let mut acc = 0.0;
        for i in 0..side {
            for j in 0..side {
                let v = g.evaluate(&[i as f64 / side as f64, j as f64 / side as f64]);
                acc += v * v;
            }
        }
        let quadrature = acc / (side * side) as f64;
        let tail = tail_sum(&f, 2.0, &BigUint::from(m + 1)).unwrap();
        let remainder = f.l2_norm_sq() - truncate(&f, m).l2_norm_sq();
        worst = worst.max((quadrature - tail).abs()).max((remainder - tail).abs());
        let bound = r_const.sqrt() * (m as f64).powf(-zeta / 2.0);
        ensure(
            quadrature.sqrt() <= bound,
            format!("m = {m}: ||f - f_m|| = {} above {bound}", quadrature.sqrt()),
        )?;
        max_ratio = max_ratio.max(quadrature.sqrt() / bound);
    }
    ensure(worst <= 1e-12, format!("Parseval mismatch {worst:e}"))?;
    Ok(format!(
        "max Parseval error {worst:.1e}, R = {r_const:.3}, zeta = {zeta}, max ||f - f_m|| / bound = {max_ratio:.3}"
    ))
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    toral_lab::numeric::linear_fit(xs, ys).unwrap().slope
}

fn lacunary_sandwich() -> Outcome {
    let (p, levels) = (3.0, 20);
    let q = p / (p - 1.0);
    let fit_grid: Vec<u64> = (6..=20).step_by(2).map(|e| 1u64 << e).collect();
    let mut lines = Vec::new();
    for gamma in [1.5, 2.0, 3.0] {
        let f = lacunary(2, gamma, q, levels).unwrap();
        let loglog: Vec<f64> = fit_grid.iter().map(|&r| (r as f64 * 2f64.ln()).ln()).collect();
        for (power, expected) in [(q, 1.0 - gamma), (2.0, 1.0 - 2.0 * gamma / q)] {
            let logs: Vec<f64> = fit_grid
                .iter()
                .map(|&r| tail_sum(&f, power, &(BigUint::from(1u32) << r)).unwrap().ln())
                .collect();
            let fitted = slope(&loglog, &logs);
            ensure(
                ((fitted - expected) / expected).abs() <= 0.10,
                format!("gamma = {gamma}, power {power:.3}: slope {fitted:.4}, expected {expected:.4}"),
            )?;
            lines.push(format!("{fitted:.3}/{expected:.3}"));

            for zeta in [0.1, 0.5, 1.0] {
                let spec = TailConditionSpec::new(power, TailShape::Polynomial { zeta }, 1.0, Some(p)).unwrap();
                let r = fit_constant(&f, &spec, 4096).unwrap();
                let spec = TailConditionSpec { constant_r: r, ..spec };
                let large: Vec<BigUint> = [1024u32, 2048, 4096, 8192]
                    .iter()
                    .map(|&e| BigUint::from(1u32) << e)
                    .collect();
                let rep = verify_condition(&f, &spec, &large).unwrap();
                ensure(
                    rep.holds.iter().all(|h| !h),
                    format!("gamma = {gamma}, zeta = {zeta}: polynomial condition holds at some large b"),
                )?;
            }
        }
    }
    Ok(format!("slopes fitted/expected {}", lines.join(", ")))
}

fn markov_instances() -> Vec<(&'static str, MarkovProcessModel)> {
    let two = vec![vec![0.7, 0.3], vec![0.4, 0.6]];
    let three = vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.3, 0.3, 0.4]];
    vec![
        (
            "2-state adapted",
            MarkovProcessModel::centered(two.clone(), Observable::adapted_scalar(&[1.0, -2.0])).unwrap(),
        ),
        (
            "2-state non-adapted",
            MarkovProcessModel::centered(two, Observable::non_adapted_scalar(&[vec![1.0, -1.0], vec![0.5, 2.0]]))
                .unwrap(),
        ),
        (
            "3-state adapted",
            MarkovProcessModel::centered(three.clone(), Observable::adapted_scalar(&[2.0, -1.0, 0.5])).unwrap(),
        ),
        (
            "3-state non-adapted",
            MarkovProcessModel::centered(
                three,
                Observable::non_adapted_scalar(&[vec![1.0, 0.0, -1.0], vec![0.3, 2.0, -0.7], vec![-1.5, 0.4, 0.9]]),
            )
            .unwrap(),
        ),
    ]
}

fn martingale_exactness() -> Outcome {
    let start = Instant::now();
    let grid: Vec<usize> = (4..=10).map(|e| 1 << e).collect();
    let mut lines = Vec::new();
    for (seed, (name, model)) in markov_instances().into_iter().enumerate() {
        let d0 = d0_table(&model).unwrap();
        let defect = martingale_defect(&model, &d0);
        ensure(defect <= 1e-12, format!("{name}: E(d0 | past) = {defect:e}"))?;
        for n in 1..=8 {
            let e = enumerate_decomposition(&model, 2.0, n).unwrap();
            ensure(
                e.consistent(),
                format!("{name}, n = {n}: telescoping defect {:e}", e.telescoping_defect),
            )?;
        }
        for p in [2.0, 3.0] {
            let b = verify_remainder_bound(&model, p, &grid).unwrap();
            ensure(b.holds, format!("{name}, p = {p}: ratios {:?}", b.ratios))?;
            let m = verify_maximal_remainder(&model, p, &grid, 10_000, 31 + seed as u64).unwrap();
            ensure(m.decreasing, format!("{name}, p = {p}: maximal ratios {:?}", m.ratios))?;
            if p == 2.0 {
                lines.push(format!("{name}: C = {:.3}", b.fitted_constant));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 300.0, format!("took {elapsed:.1} s"))?;
    Ok(format!("{} ({elapsed:.1} s)", lines.join("; ")))
}

fn condition_checkers() -> Outcome {
    let lags = 4096;
    let table = |a: &dyn Fn(f64) -> f64| {
        let seq: Vec<f64> = (0..=lags).map(|n| if n == 0 { 0.0 } else { a(n as f64) }).collect();
        let zeros = vec![0.0; lags + 1];
        ProjectionTable::from_sequences(seq.clone(), seq.clone(), seq, zeros)
    };
    let geometric = table(&|n| 0.8f64.powf(n));
    for c in Condition::ALL {
        let r = check_summability(&geometric, c).unwrap();
        ensure(
            r.verdict == SummabilityVerdict::Converges,
            format!("geometric decay: {c:?} gave {:?}", r.verdict),
        )?;
    }
    let real = conditional_norms(&markov_instances()[3].1, 2.0, 256).unwrap();
    for c in Condition::ALL {
        let r = check_summability(&real, c).unwrap();
        ensure(
            r.verdict == SummabilityVerdict::Converges,
            format!("3-state chain: {c:?} gave {:?}", r.verdict),
        )?;
    }
    let slow = check_summability(&table(&|n| n.powf(-0.5)), Condition::ConditionalMeanSum).unwrap();
    ensure(
        slow.verdict == SummabilityVerdict::Diverges,
        format!("n^-1/2: {:?}", slow.verdict),
    )?;
    let log3 = check_summability(
        &table(&|n| 1.0 / (n * n.ln().powi(3))),
        Condition::WeightedConditionalMeanSum,
    )
    .unwrap();
    ensure(
        log3.verdict == SummabilityVerdict::Converges,
        format!("n^-1 log^-3 n: {:?}", log3.verdict),
    )?;
    let again = check_summability(
        &table(&|n| 1.0 / (n * n.ln().powi(3))),
        Condition::WeightedConditionalMeanSum,
    )
    .unwrap();
    ensure(again == log3, "verdicts differ between identical runs")?;
    Ok("geometric converges, n^-1/2 diverges, n^-1 log^-3 n converges under the weighted sum".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("ergodicity and hyperbolicity catalog", ergodicity_catalog),
        ("exact long-run variance of a single cosine", exact_single_cosine),
        ("variance profile convergence", variance_convergence),
        ("central limit marginal", clt_marginal),
        ("Donsker functionals", donsker),
        ("iterated-logarithm envelope band", lil_band),
        ("Parseval truncation", parseval_truncation),
        ("lacunary tail sandwich", lacunary_sandwich),
        ("martingale decomposition exactness", martingale_exactness),
        ("summability checkers", condition_checkers),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
