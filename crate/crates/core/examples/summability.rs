// Summability checks on projection norms: exact ones from a Markov chain
// and synthetic sequences with a prescribed decay.

use toral_lab::martingale::{
    check_all, check_summability, conditional_norms, Condition, MarkovProcessModel, Observable, ProjectionTable,
};

fn synthetic(a: impl Fn(f64) -> f64, lags: usize) -> ProjectionTable {
    let seq: Vec<f64> = (0..=lags).map(|n| if n == 0 { 0.0 } else { a(n as f64) }).collect();
    ProjectionTable::from_sequences(seq.clone(), seq.clone(), seq, vec![0.0; lags + 1])
}

fn main() -> toral_lab::Result<()> {
    let model = MarkovProcessModel::two_state_flip(0.2)?;
    let table = conditional_norms(&model, 2.0, 512)?;
    for r in check_all(&table)? {
        println!("flip chain  {:<32} {:?}", format!("{:?}", r.condition), r.verdict);
    }

    let slow = MarkovProcessModel::centered(
        vec![vec![0.999, 0.001], vec![0.001, 0.999]],
        Observable::adapted_scalar(&[1.0, -1.0]),
    )?;
    let r = check_summability(&conditional_norms(&slow, 2.0, 512)?, Condition::ProjectiveSum)?;
    println!("sticky chain: {:?} with tail {:?}", r.verdict, r.fitted_tail);

    for (name, a) in [
        ("n^-1/2", Box::new(|n: f64| n.powf(-0.5)) as Box<dyn Fn(f64) -> f64>),
        ("n^-1 log^-3 n", Box::new(|n: f64| 1.0 / (n * n.max(3.0).ln().powi(3)))),
        ("0.9^n", Box::new(|n: f64| 0.9f64.powf(n))),
    ] {
        let t = synthetic(a, 4096);
        let plain = check_summability(&t, Condition::ConditionalMeanSum)?;
        let weighted = check_summability(&t, Condition::WeightedConditionalMeanSum)?;
        println!("{name:<14} plain {:?}, weighted {:?}", plain.verdict, weighted.verdict);
    }
    Ok(())
}
