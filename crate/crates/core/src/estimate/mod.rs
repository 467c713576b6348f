//! Log-log regression of cumulative success counts: Heaps exponents,
//! centrality ratios from intercept differences and source-split fits.

mod fit;
mod sample;

pub use fit::{centrality_ratios, fit_heaps, fit_split, write_fitted_lines, FitResult, SplitFit};
pub use sample::{geometric_times, subsample, CountSource, LogLogSample, SamplePoint};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("sample is empty (every point has a zero count)")]
    EmptySample,
    #[error("subsample size {0} is below the minimum of 10")]
    InvalidSize(usize),
    #[error("need at least {need} points with positive counts, have {have}")]
    TooFewPoints { have: usize, need: usize },
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("sample has no source-split counts")]
    MissingSplit,
    #[error("category index {0} is out of range")]
    InvalidCategory(usize),
    #[error("malformed sample: {0}")]
    Shape(String),
}
