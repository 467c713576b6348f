use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::*;
use super::{CliError, TOOL_NAME, VERSION};
use crate::estimate::{
    centrality_ratios, fit_heaps, fit_split, subsample, write_fitted_lines, CountSource,
    EstimateError, FitResult, LogLogSample,
};
use crate::inference::{mle_iota, test_sweep, write_sweep_csv, InferenceError};
use crate::model::io::MatrixSpec;
use crate::model::{growth_exponents, perron};
use crate::patent;
use crate::sim::{
    self, run_ensemble, simulate_outcomes, CheckpointSchedule, ModelParams, SimError, Trajectory,
};
use crate::success::SuccessMatrix;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))
}

fn finish<W: Write>(mut w: W, name: &str) -> Result<(), CliError> {
    w.flush()
        .map_err(|e| CliError::Runtime(format!("writing {name}: {e}")))
}

/// Writes `{tool, version, command, config, ...body}` as pretty JSON.
fn write_document<C: Serialize>(
    dir: &Path,
    name: &str,
    command: &str,
    config: &C,
    body: Value,
) -> Result<(), CliError> {
    let mut doc = serde_json::Map::new();
    doc.insert("tool".into(), json!(TOOL_NAME));
    doc.insert("version".into(), json!(VERSION));
    doc.insert("command".into(), json!(command));
    doc.insert(
        "config".into(),
        serde_json::to_value(config).map_err(CliError::runtime)?,
    );
    if let Value::Object(fields) = body {
        doc.extend(fields);
    }
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, &Value::Object(doc)).map_err(CliError::runtime)?;
    writeln!(w).map_err(CliError::runtime)?;
    finish(w, name)
}

fn sim_error(e: SimError) -> CliError {
    CliError::Validation(e.to_string())
}

fn estimate_error(e: EstimateError) -> CliError {
    CliError::Runtime(e.to_string())
}

fn inference_error(e: InferenceError) -> CliError {
    match e {
        InferenceError::InvalidIota(_)
        | InferenceError::InvalidGammaStar(_)
        | InferenceError::ParameterLength { .. }
        | InferenceError::InvalidInitialConditions => CliError::Validation(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    }
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

pub(super) fn simulate(cfg: &SimulateConfig, out: &Path) -> Result<(), CliError> {
    if let MatrixSpec::File { path } = &cfg.matrix {
        if !path.exists() {
            return Err(CliError::Runtime(format!(
                "matrix file {} does not exist",
                path.display()
            )));
        }
    }
    let matrix = cfg.matrix.build().map_err(CliError::validation)?;
    let n = matrix.n();
    let params = ModelParams {
        theta: cfg.theta.clone().unwrap_or_else(|| vec![0.5; n]),
        c: cfg.c.clone().unwrap_or_else(|| vec![1.0; n]),
        pi: cfg.pi.clone(),
        shocks: cfg.shocks.clone(),
    };
    params.validate(n, Some(cfg.t_max)).map_err(sim_error)?;
    if cfg.t_max == 0 {
        return Err(sim_error(SimError::InvalidHorizon));
    }
    if cfg.points_per_decade == 0 {
        return Err(CliError::Validation("points_per_decade must be positive".into()));
    }
    let schedule = match &cfg.checkpoints {
        Some(points) => {
            CheckpointSchedule::from_points(points.clone(), cfg.t_max).map_err(sim_error)?
        }
        None => CheckpointSchedule::geometric(cfg.t_max, cfg.points_per_decade),
    };
    let ensemble = run_ensemble(&params, &matrix, cfg.t_max, cfg.replicas, cfg.seed, &schedule)
        .map_err(sim_error)?;

    match cfg.format {
        TrajectoryFormat::Long => {
            let w = create(out, "trajectories.csv")?;
            sim::io::write_long(&ensemble, w).map_err(CliError::runtime)?;
        }
        TrajectoryFormat::Wide => {
            for tr in &ensemble {
                let name = format!("trajectory_{}.csv", tr.replica_id);
                sim::io::write_wide(tr, create(out, &name)?).map_err(CliError::runtime)?;
            }
        }
    }
    if cfg.write_outcomes {
        for r in 0..cfg.replicas {
            let m = simulate_outcomes(&params, &matrix, cfg.t_max, cfg.seed, r).map_err(sim_error)?;
            let name = format!("outcomes_{r}.csv");
            m.write_csv(create(out, &name)?).map_err(CliError::runtime)?;
        }
    }

    let spectral = match perron(&matrix) {
        Ok(s) => serde_json::to_value(s).map_err(CliError::runtime)?,
        Err(e) => json!({ "error": e.to_string() }),
    };
    let growth = serde_json::to_value(growth_exponents(&matrix)).map_err(CliError::runtime)?;
    write_document(
        out,
        "summary.json",
        "simulate",
        cfg,
        json!({
            "spectral": spectral,
            "growth": growth,
            "final": final_counts(&ensemble),
        }),
    )
}

/// Cross-replica mean of the final counts with standard errors.
fn final_counts(ensemble: &[Trajectory]) -> Value {
    let finals: Vec<&[u64]> = ensemble
        .iter()
        .filter_map(|tr| tr.checkpoints.last().map(|c| c.counts.as_slice()))
        .collect();
    let Some(first) = finals.first() else {
        return Value::Null;
    };
    let r = finals.len() as f64;
    let t = ensemble[0].checkpoints.last().map_or(0, |c| c.t);
    let mut mean = Vec::new();
    let mut se = Vec::new();
    for h in 0..first.len() {
        let m = finals.iter().map(|c| c[h] as f64).sum::<f64>() / r;
        mean.push(m);
        if finals.len() > 1 {
            let var = finals.iter().map(|c| (c[h] as f64 - m).powi(2)).sum::<f64>() / (r - 1.0);
            se.push(Some((var / r).sqrt()));
        } else {
            se.push(None);
        }
    }
    json!({ "t": t, "replicas": finals.len(), "mean_counts": mean, "se": se })
}

enum Loaded {
    Trajectory(Trajectory),
    Matrix(SuccessMatrix),
}

fn detect(path: &Path, format: InputFormat) -> Result<InputFormat, CliError> {
    if format != InputFormat::Auto {
        return Ok(format);
    }
    let mut first = String::new();
    let mut reader = open(path)?;
    let mut buf = [0u8; 64];
    let k = reader.read(&mut buf).map_err(CliError::runtime)?;
    first.push_str(&String::from_utf8_lossy(&buf[..k]));
    let field = first.split([',', '\n', '\r']).next().unwrap_or("").trim();
    match field {
        "t" | "replica" => Ok(InputFormat::Trajectory),
        "id" => Ok(InputFormat::SuccessMatrix),
        _ => Err(CliError::Runtime(format!(
            "{}: cannot tell the file format from its header",
            path.display()
        ))),
    }
}

fn load(path: &Path, format: InputFormat, replica: u64) -> Result<Loaded, CliError> {
    let ctx = |e: &dyn std::fmt::Display| CliError::Runtime(format!("{}: {e}", path.display()));
    match detect(path, format)? {
        InputFormat::SuccessMatrix => SuccessMatrix::read_csv(open(path)?)
            .map(Loaded::Matrix)
            .map_err(|e| ctx(&e)),
        _ => {
            let all = sim::io::read_csv(open(path)?).map_err(|e| ctx(&e))?;
            all.into_iter()
                .find(|tr| tr.replica_id == replica)
                .map(Loaded::Trajectory)
                .ok_or_else(|| {
                    CliError::Validation(format!("{}: no replica {replica}", path.display()))
                })
        }
    }
}

fn sample_of(data: &Loaded, size: usize) -> Result<LogLogSample, CliError> {
    if size < 10 {
        return Err(CliError::Validation(format!(
            "size must be at least 10, got {size}"
        )));
    }
    let source = match data {
        Loaded::Trajectory(tr) => CountSource::Trajectory(tr),
        Loaded::Matrix(m) => CountSource::Matrix(m),
    };
    subsample(source, size).map_err(estimate_error)
}

fn common_slope(data: &Loaded, size: usize) -> Result<FitResult, CliError> {
    fit_heaps(&sample_of(data, size)?).map_err(estimate_error)
}

pub(super) fn estimate(cfg: &EstimateConfig, out: &Path) -> Result<(), CliError> {
    let data = load(&cfg.input, cfg.format, cfg.replica)?;
    let mut sample = sample_of(&data, cfg.size)?;
    if let Some([lo, hi]) = cfg.window {
        if lo > hi {
            return Err(CliError::Validation(format!("window [{lo}, {hi}] is empty")));
        }
        sample = sample.window(lo, hi).map_err(estimate_error)?;
    }
    let fit = fit_heaps(&sample).map_err(estimate_error)?;
    let baseline = match &cfg.baseline {
        None => 0,
        Some(label) => fit.labels.iter().position(|l| l == label).ok_or_else(|| {
            CliError::Validation(format!("baseline {label:?} is not a category"))
        })?,
    };
    let ratios = centrality_ratios(&fit, baseline).map_err(estimate_error)?;
    let mut body = json!({ "fit": fit, "baseline": fit.labels[baseline], "ratios": ratios });
    if sample.has_split() {
        let gamma = match cfg.split_gamma_star {
            GammaSource::Fixed(g) => g,
            GammaSource::Keyword(_) => fit.common_slope,
        };
        match fit_split(&sample, gamma, baseline) {
            Ok(split) => body["split"] = serde_json::to_value(split).map_err(CliError::runtime)?,
            Err(e) => {
                warn(&format!("split fit skipped: {e}"));
                body["split_error"] = json!(e.to_string());
            }
        }
    }
    let w = create(out, "fitted_lines.csv")?;
    write_fitted_lines(&sample, &fit, w).map_err(CliError::runtime)?;
    write_document(out, "fit.json", "estimate", cfg, body)
}

fn resolve_gamma(
    source: GammaSource,
    data: Option<&Loaded>,
    size: usize,
) -> Result<(f64, Option<FitResult>), CliError> {
    match (source, data) {
        (GammaSource::Fixed(g), _) => Ok((g, None)),
        (GammaSource::Keyword(_), Some(d)) => {
            let fit = common_slope(d, size)?;
            Ok((fit.common_slope, Some(fit)))
        }
        (GammaSource::Keyword(_), None) => Err(CliError::Validation(
            "gamma_star must be a number when no input file is given".into(),
        )),
    }
}

pub(super) fn test(cfg: &TestConfig, out: &Path) -> Result<(), CliError> {
    let (data, counts, t) = match (&cfg.input, &cfg.counts) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "give either input or counts, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Validation("one of input or counts is required".into()))
        }
        (None, Some(c)) => {
            let t = cfg
                .t
                .ok_or_else(|| CliError::Validation("t is required with counts".into()))?;
            (None, c.clone(), t)
        }
        (Some(path), None) => {
            let data = load(path, cfg.format, cfg.replica)?;
            let (counts, t) = match &data {
                Loaded::Trajectory(tr) => {
                    let last = tr
                        .checkpoints
                        .last()
                        .ok_or_else(|| CliError::Runtime("trajectory is empty".into()))?;
                    (last.counts.iter().map(|&x| x as f64).collect(), last.t)
                }
                Loaded::Matrix(m) => (
                    m.totals().iter().map(|&x| x as f64).collect(),
                    m.n_rows() as u64,
                ),
            };
            (Some(data), counts, t)
        }
    };
    let (gamma_star, fit) = resolve_gamma(cfg.gamma_star, data.as_ref(), cfg.size)?;
    let results = test_sweep(&counts, t, &cfg.iota0, gamma_star).map_err(inference_error)?;
    for r in &results {
        if let Some(w) = &r.warning {
            warn(w);
        }
    }
    write_sweep_csv(&results, create(out, "test_sweep.csv")?).map_err(CliError::runtime)?;
    let mut body = json!({ "counts": counts, "t": t, "gamma_star": gamma_star, "results": results });
    if let Some(f) = fit {
        body["gamma_fit"] = json!({ "common_slope": f.common_slope, "r2_common": f.r2_common });
    }
    write_document(out, "test.json", "test", cfg, body)
}

pub(super) fn mle(cfg: &MleConfig, out: &Path) -> Result<(), CliError> {
    let data = SuccessMatrix::read_csv(open(&cfg.input)?)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", cfg.input.display())))?;
    let n = data.n_cols();
    let wrapped = Loaded::Matrix(data);
    let (gamma_star, fit) = resolve_gamma(cfg.gamma_star, Some(&wrapped), cfg.size)?;
    let Loaded::Matrix(data) = wrapped else {
        unreachable!()
    };
    let theta = cfg.theta.clone().unwrap_or_else(|| vec![0.5; n]);
    let c = cfg.c.clone().unwrap_or_else(|| vec![1.0; n]);
    let result = mle_iota(&data, gamma_star, &theta, &c).map_err(inference_error)?;
    if result.at_boundary {
        warn("likelihood maximum is at the edge of the search grid");
    }
    let mut body = json!({ "result": result });
    if let Some(f) = fit {
        body["gamma_fit"] = json!({ "common_slope": f.common_slope, "r2_common": f.r2_common });
    }
    write_document(out, "mle.json", "mle", cfg, body)
}

pub(super) fn index(cfg: &IndexConfig, out: &Path) -> Result<(), CliError> {
    if !(cfg.tau.is_finite() && (0.0..=1.0).contains(&cfg.tau)) {
        return Err(CliError::Validation(format!("tau must lie in [0, 1], got {}", cfg.tau)));
    }
    if cfg.window_years == 0 {
        return Err(CliError::Validation(patent::PatentError::InvalidWindow.to_string()));
    }
    let (tables, report) = patent::ingest(open(&cfg.patents)?, open(&cfg.citations)?, &cfg.categories)
        .map_err(|e| match e {
            patent::PatentError::InvalidCategories => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        })?;
    for w in &report.warnings {
        warn(w);
    }
    let cit = patent::forward_citation_counts(&tables, cfg.window_years).map_err(CliError::validation)?;
    let index = patent::compute_index(&tables, cit);
    let matrix = patent::success_matrix(&tables, &index, cfg.tau);
    let sweep = if cfg.sweep_fits {
        patent::sweep_with_fits(&tables, &index, &cfg.sweep_taus, cfg.size)
    } else {
        patent::threshold_sweep(&index, &cfg.sweep_taus)
    };

    matrix
        .write_csv(create(out, "success_matrix.csv")?)
        .map_err(CliError::runtime)?;
    index
        .write_csv(&tables, create(out, "index_table.csv")?)
        .map_err(CliError::runtime)?;
    patent::write_sweep_csv(&sweep, &tables.categories, create(out, "sweep.csv")?)
        .map_err(CliError::runtime)?;
    write_document(
        out,
        "index.json",
        "index",
        cfg,
        json!({
            "report": report,
            "n_patents": tables.patents.len(),
            "totals": matrix.totals(),
            "sweep": sweep,
        }),
    )
}
