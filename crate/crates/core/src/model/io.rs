//! Matrix file formats.
//!
//! * CSV: N lines of N comma-separated numbers, row `j` = source process `j`.
//!   No header.
//! * JSON: `{"n": N, "entries": [[...], ...]}`.
//! * Config: either of the above inline, a mean-field triple
//!   `{"mean_field": {"gamma_star": g, "iota": i, "n": N}}`, or a path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{InteractionMatrix, MatrixError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldSpec {
    pub gamma_star: f64,
    pub iota: f64,
    pub n: usize,
}

/// How a run configuration names its interaction matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    MeanField { mean_field: MeanFieldSpec },
    Inline(MatrixJson),
    File { path: PathBuf },
}

impl MatrixSpec {
    pub fn build(&self) -> Result<InteractionMatrix, MatrixError> {
        match self {
            MatrixSpec::MeanField { mean_field: mf } => {
                InteractionMatrix::mean_field(mf.gamma_star, mf.iota, mf.n)
            }
            MatrixSpec::Inline(json) => from_json(json),
            MatrixSpec::File { path } => read_matrix_file(path),
        }
    }
}

pub fn from_json(json: &MatrixJson) -> Result<InteractionMatrix, MatrixError> {
    if json.entries.len() != json.n {
        return Err(MatrixError::Parse(format!(
            "\"n\" is {} but {} rows were given",
            json.n,
            json.entries.len()
        )));
    }
    InteractionMatrix::validate(&json.entries)
}

pub fn to_json(matrix: &InteractionMatrix) -> MatrixJson {
    MatrixJson {
        n: matrix.n(),
        entries: matrix.rows(),
    }
}

pub fn parse_csv(text: &str) -> Result<InteractionMatrix, MatrixError> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| {
                    MatrixError::Parse(format!("line {}: {:?}: {e}", lineno + 1, field.trim()))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    InteractionMatrix::validate(&rows)
}

pub fn to_csv(matrix: &InteractionMatrix) -> String {
    let mut out = String::new();
    for row in matrix.rows() {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Reads a `.json` file as [`MatrixJson`] (or a full [`MatrixSpec`]) and
/// anything else as CSV.
pub fn read_matrix_file(path: &Path) -> Result<InteractionMatrix, MatrixError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MatrixError::Parse(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    if is_json {
        let spec: MatrixSpec = serde_json::from_str(&text)
            .map_err(|e| MatrixError::Parse(format!("{}: {e}", path.display())))?;
        if let MatrixSpec::File { .. } = spec {
            return Err(MatrixError::Parse(format!(
                "{}: matrix file may not point to another file",
                path.display()
            )));
        }
        spec.build()
    } else {
        parse_csv(&text)
    }
}
