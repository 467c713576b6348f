//! The mean-field interaction test, chi-square tails, the maximum-likelihood
//! estimator of the interaction intensity and the gamma-ratio helper.

mod mle;
mod special;
mod test;

pub use mle::{mle_iota, MleResult};
pub use special::{chisq_sf, gamma_q, ln_gamma, zeta};
pub use test::{mean_field_test, test_sweep, write_sweep_csv, TestResult};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("chi-square argument {0} is negative")]
    NegativeArgument(f64),
    #[error("degrees of freedom must be at least 1")]
    InvalidDegreesOfFreedom,
    #[error("zeta requires x > 0, got {0}")]
    NonpositiveX(f64),
    #[error("the test needs at least 2 categories, got {0}")]
    TooFewCategories(usize),
    #[error("all counts are zero")]
    AllZeroCounts,
    #[error("counts must be finite and non-negative")]
    InvalidCounts,
    #[error("iota0 = {0} is not a finite number")]
    InvalidIota(f64),
    #[error("gamma_star = {0} is not in (0, 1]")]
    InvalidGammaStar(f64),
    #[error("success matrix has no rows")]
    EmptyData,
    #[error("theta has {theta} and c has {c} components, expected {expected}")]
    ParameterLength { expected: usize, theta: usize, c: usize },
    #[error("theta must be positive with c >= theta")]
    InvalidInitialConditions,
    #[error("likelihood is zero for every iota on the grid")]
    LikelihoodDegenerate,
}
