//! Toral automorphisms as unimodular integer matrices and their exact
//! classification.

mod classify;
mod matrix;
pub mod poly;
pub mod roots;

pub use classify::{classify, cyclotomic_factor, unit_circle_root, Classification, UNIT_CIRCLE_RADIUS};
pub use matrix::{dual_iterate, dual_iterate_i64, AutoMatrix, BigVec};
