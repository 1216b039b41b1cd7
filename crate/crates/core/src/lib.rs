//! Exact spectral computations, exact-arithmetic orbit simulation and
//! statistical checks of invariance principles for partial sums
//! `f∘T + ... + f∘T^n` under ergodic automorphisms `T` of the d-torus.

// NaN must fail domain checks, hence `!(x > 0.0)` rather than `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod correlation;
pub mod error;
pub mod fourier;
pub mod martingale;
pub mod numeric;
pub mod orbit;
pub mod runner;
pub mod stats;
pub mod torus;

pub use error::{Error, Result};
