//! Martingale-coboundary decompositions on stationary finite-state Markov
//! chains, where every conditional expectation is a finite sum.

mod bounds;
mod conditions;
mod model;
mod projection;

pub use bounds::{
    enumerate_decomposition, verify_maximal_remainder, verify_remainder_bound, EnumerationCheck,
    MaximalRemainderReport, RemainderBoundReport, ENUMERATION_TOL, MAX_ENUMERATION_N, MIN_MONTE_CARLO_PATHS,
};
pub use conditions::{
    check_all, check_summability, Condition, SummabilityReport, SummabilityVerdict, TailModel, MIN_LAGS, MIN_R_SQUARED,
    POLYNOMIAL_MARGIN, ROUNDOFF_FLOOR,
};
pub use model::{lp_norm, MarkovProcessModel, Observable, StateTable, MODEL_TOL};
pub use projection::{
    chain_long_run_covariance, conditional_norms, d0_covariance, d0_table, martingale_defect, projection_inner_product,
    projection_values, PairTable, ProjectionTable,
};
