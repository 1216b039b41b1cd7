//! Sparse Fourier observables on the torus, the coefficient families used
//! to probe the tail conditions, and the tail-condition verifiers.

mod family;
mod function;
mod tail;

pub use family::{lacunary, lacunary_levels, leonov, Family};
pub use function::{CoeffMap, FourierFunction, Lattice};
pub use tail::{
    block_index, fit_constant, sup_norm, tail_sum, tail_sum_certified, truncate, verify_condition, ConditionReport,
    TailConditionSpec, TailShape, TailValue,
};

pub(crate) use function::is_positive_half as function_is_positive_half;
