//! Per-command run configurations. Every field has a serde default where a
//! sensible one exists, so a config may be built entirely from flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::model::io::MatrixSpec;
use crate::sim::ShockSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryFormat {
    /// One file per replica.
    Wide,
    /// One file with a replica column.
    #[default]
    Long,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub matrix: MatrixSpec,
    /// Defaults to ½ for every process.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    /// Defaults to 1 for every process.
    #[serde(default)]
    pub c: Option<Vec<f64>>,
    #[serde(default)]
    pub pi: Option<Vec<f64>>,
    #[serde(default)]
    pub shocks: Vec<ShockSpec>,
    pub t_max: u64,
    #[serde(default = "one")]
    pub replicas: u64,
    #[serde(default)]
    pub seed: u64,
    /// Explicit checkpoint times; the geometric grid when absent.
    #[serde(default)]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default = "default_per_decade")]
    pub points_per_decade: u32,
    #[serde(default)]
    pub format: TrajectoryFormat,
    /// Also write each replica's outcome rows as a success-matrix CSV.
    #[serde(default)]
    pub write_outcomes: bool,
}

fn one() -> u64 {
    1
}

fn default_per_decade() -> u32 {
    200
}

/// Which input format a file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    /// Decide from the header.
    #[default]
    Auto,
    Trajectory,
    SuccessMatrix,
}

/// `γ*` either fixed or estimated first by a common-slope fit on the input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSource {
    Fixed(f64),
    Keyword(EstimateKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKeyword {
    Estimate,
}

impl Default for GammaSource {
    fn default() -> Self {
        GammaSource::Keyword(EstimateKeyword::Estimate)
    }
}

impl std::str::FromStr for GammaSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "estimate" {
            return Ok(GammaSource::Keyword(EstimateKeyword::Estimate));
        }
        s.parse::<f64>()
            .map(GammaSource::Fixed)
            .map_err(|_| format!("expected a number or \"estimate\", got {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub input: PathBuf,
    #[serde(default)]
    pub format: InputFormat,
    /// Which replica of a long-format trajectory file to fit.
    #[serde(default)]
    pub replica: u64,
    #[serde(default = "default_size")]
    pub size: usize,
    /// Restrict the fit to `t_lo ≤ t ≤ t_hi`.
    #[serde(default)]
    pub window: Option<[u64; 2]>,
    /// Baseline category label for ratios; the first category when absent.
    #[serde(default)]
    pub baseline: Option<String>,
    /// Slope pinned in the split fits.
    #[serde(default)]
    pub split_gamma_star: GammaSource,
}

fn default_size() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    /// Trajectory or success-matrix file; the final counts are tested.
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// Counts given directly instead of an input file.
    #[serde(default)]
    pub counts: Option<Vec<f64>>,
    /// Time step of `counts`.
    #[serde(default)]
    pub t: Option<u64>,
    #[serde(default)]
    pub format: InputFormat,
    #[serde(default)]
    pub replica: u64,
    #[serde(default = "default_iota0")]
    pub iota0: Vec<f64>,
    #[serde(default)]
    pub gamma_star: GammaSource,
    #[serde(default = "default_size")]
    pub size: usize,
}

fn default_iota0() -> Vec<f64> {
    vec![0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleConfig {
    /// Success-matrix CSV.
    pub input: PathBuf,
    #[serde(default)]
    pub gamma_star: GammaSource,
    /// Defaults to ½ for every category.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    /// Defaults to 1 for every category.
    #[serde(default)]
    pub c: Option<Vec<f64>>,
    #[serde(default = "default_size")]
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexConfig {
    pub patents: PathBuf,
    pub citations: PathBuf,
    #[serde(default = "default_categories")]
    pub categories: Vec<String>,
    #[serde(default = "default_window")]
    pub window_years: u32,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_sweep")]
    pub sweep_taus: Vec<f64>,
    /// Chain a Heaps fit for each swept threshold.
    #[serde(default)]
    pub sweep_fits: bool,
    #[serde(default = "default_size")]
    pub size: usize,
}

fn default_categories() -> Vec<String> {
    crate::patent::DEFAULT_CATEGORIES
        .iter()
        .map(|c| c.to_string())
        .collect()
}

fn default_window() -> u32 {
    5
}

fn default_tau() -> f64 {
    0.8
}

fn default_sweep() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
}
