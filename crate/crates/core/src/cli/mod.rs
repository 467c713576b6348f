//! The `reinforced` command-line tool.
//!
//! Each subcommand resolves a JSON configuration (from `--config`, which may
//! be a bare config or any output document embedding one under `"config"`),
//! applies flag overrides, validates it and writes its outputs to
//! `--output-dir`. Every JSON output embeds the resolved config and the tool
//! version, so feeding an output back through `--config` repeats the run.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime or data error.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

pub use config::{
    EstimateConfig, GammaSource, IndexConfig, InputFormat, MleConfig, SimulateConfig, TestConfig,
    TrajectoryFormat,
};

pub const TOOL_NAME: &str = "reinforced";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or arguments (exit code 1).
    Validation(String),
    /// I/O failure or unusable input data (exit code 2).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub(crate) fn validation(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }

    pub(crate) fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = TOOL_NAME, version, about = "Interacting reinforced Bernoulli processes: simulate, fit, test")]
pub struct Cli {
    /// JSON run configuration (or a previous output document).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for replica-level parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate trajectories.
    Simulate(SimulateArgs),
    /// Fit Heaps exponents, centrality ratios and source splits.
    Estimate(EstimateArgs),
    /// Mean-field interaction test over a sweep of iota0 values.
    Test(TestArgs),
    /// Maximum-likelihood estimate of the interaction intensity.
    Mle(MleArgs),
    /// Build the forward-citation index and success matrix.
    Index(IndexArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Matrix file (CSV or JSON).
    #[arg(long, conflicts_with = "mean_field")]
    pub matrix: Option<PathBuf>,
    /// Mean-field matrix as GAMMA_STAR,IOTA,N.
    #[arg(long, value_delimiter = ',')]
    pub mean_field: Option<Vec<f64>>,
    #[arg(long)]
    pub t_max: Option<u64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<TrajectoryFormat>,
    #[arg(long)]
    pub write_outcomes: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    #[arg(long)]
    pub replica: Option<u64>,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub baseline: Option<String>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Counts S_1,...,S_N given directly.
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<f64>>,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    #[arg(long)]
    pub replica: Option<u64>,
    /// A number, or "estimate" to fit it from the input first.
    #[arg(long)]
    pub gamma_star: Option<GammaSource>,
    #[arg(long, value_delimiter = ',')]
    pub iota0: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct MleArgs {
    /// Success-matrix CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// A number, or "estimate" to fit it from the input first.
    #[arg(long)]
    pub gamma_star: Option<GammaSource>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub patents: Option<PathBuf>,
    #[arg(long)]
    pub citations: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
    #[arg(long)]
    pub window_years: Option<u32>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub sweep_fits: bool,
}

/// Parses arguments, runs, prints errors to stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        // The global pool can only be set once per process; later calls keep it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let base = match &cli.config {
        Some(path) => load_config_value(path)?,
        None => Map::new(),
    };
    std::fs::create_dir_all(&cli.output_dir).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", cli.output_dir.display()))
    })?;
    let out = cli.output_dir.as_path();
    match cli.command {
        Command::Simulate(a) => {
            let mut v = base;
            if let Some(p) = a.matrix {
                set(&mut v, "matrix", serde_json::json!({ "path": p }));
            }
            if let Some(mf) = a.mean_field {
                if mf.len() != 3 {
                    return Err(CliError::Validation(
                        "--mean-field takes GAMMA_STAR,IOTA,N".into(),
                    ));
                }
                set(
                    &mut v,
                    "matrix",
                    serde_json::json!({"mean_field": {"gamma_star": mf[0], "iota": mf[1], "n": mf[2] as usize}}),
                );
            }
            set_opt(&mut v, "t_max", a.t_max);
            set_opt(&mut v, "replicas", a.replicas);
            set_opt(&mut v, "format", a.format);
            set_opt(&mut v, "seed", cli.seed);
            if a.write_outcomes {
                set(&mut v, "write_outcomes", Value::Bool(true));
            }
            commands::simulate(&parse_config(v)?, out)
        }
        Command::Estimate(a) => {
            let mut v = base;
            set_opt(&mut v, "input", a.input);
            set_opt(&mut v, "format", a.format);
            set_opt(&mut v, "replica", a.replica);
            set_opt(&mut v, "size", a.size);
            set_opt(&mut v, "baseline", a.baseline);
            commands::estimate(&parse_config(v)?, out)
        }
        Command::Test(a) => {
            let mut v = base;
            set_opt(&mut v, "input", a.input);
            set_opt(&mut v, "counts", a.counts);
            set_opt(&mut v, "t", a.t);
            set_opt(&mut v, "format", a.format);
            set_opt(&mut v, "replica", a.replica);
            set_opt(&mut v, "gamma_star", a.gamma_star);
            set_opt(&mut v, "iota0", a.iota0);
            commands::test(&parse_config(v)?, out)
        }
        Command::Mle(a) => {
            let mut v = base;
            set_opt(&mut v, "input", a.input);
            set_opt(&mut v, "gamma_star", a.gamma_star);
            commands::mle(&parse_config(v)?, out)
        }
        Command::Index(a) => {
            let mut v = base;
            set_opt(&mut v, "patents", a.patents);
            set_opt(&mut v, "citations", a.citations);
            set_opt(&mut v, "categories", a.categories);
            set_opt(&mut v, "window_years", a.window_years);
            set_opt(&mut v, "tau", a.tau);
            if a.sweep_fits {
                set(&mut v, "sweep_fits", Value::Bool(true));
            }
            commands::index(&parse_config(v)?, out)
        }
    }
}

fn set(map: &mut Map<String, Value>, key: &str, value: Value) {
    map.insert(key.to_string(), value);
}

fn set_opt<T: serde::Serialize>(map: &mut Map<String, Value>, key: &str, value: Option<T>) {
    if let Some(v) = value {
        map.insert(
            key.to_string(),
            serde_json::to_value(v).expect("flag values serialize"),
        );
    }
}

/// Reads a config file; an output document contributes its `"config"` member.
fn load_config_value(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let value = match value {
        Value::Object(mut m) if m.contains_key("tool") && m.contains_key("config") => {
            m.remove("config").unwrap()
        }
        other => other,
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Validation(format!(
            "{}: configuration must be a JSON object",
            path.display()
        ))),
    }
}

/// Deserializes with the failing field path in the error message.
fn parse_config<T: serde::de::DeserializeOwned>(map: Map<String, Value>) -> Result<T, CliError> {
    serde_path_to_error::deserialize(Value::Object(map)).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Validation(e.into_inner().to_string())
        } else {
            CliError::Validation(format!("{path}: {}", e.into_inner()))
        }
    })
}
