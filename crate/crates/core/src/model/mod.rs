//! Interaction matrices: validation, strongly connected structure, Perron
//! spectral data and growth-exponent prediction for reducible systems.
//!
//! Entry `(j, h)` of an [`InteractionMatrix`] is the weight with which past
//! successes of process `j` (the source) raise the success probability of
//! process `h` (the target). Column sums are therefore the total reinforcement
//! a target receives and must not exceed one.

mod growth;
pub mod io;
mod scc;
mod spectral;

pub use growth::{growth_exponents, GrowthPrediction};
pub use scc::{strongly_connected_components, Condensation};
pub use spectral::{perron, SpectralData};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on column sums above one.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("interaction matrix is empty")]
    Empty,
    #[error("row {row} has {len} entries, expected {expected} (matrix must be square)")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("column {col} sums to {sum}, which exceeds 1")]
    ColumnSumExceedsOne { col: usize, sum: f64 },
    #[error("parameter {name} = {value} is out of range ({expected})")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("interaction matrix is not irreducible")]
    NotIrreducible,
    #[error("power iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("cannot parse matrix: {0}")]
    Parse(String),
}

/// How a matrix was built. Mean-field matrices carry their parameters so the
/// second eigenvalue can be reported in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixOrigin {
    Explicit,
    MeanField { gamma_star: f64, iota: f64 },
}

/// A validated N×N non-negative interaction matrix whose columns sum to at
/// most one. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    n: usize,
    entries: Vec<f64>,
    irreducible: bool,
    origin: MatrixOrigin,
}

impl InteractionMatrix {
    /// Validates a square array of rows. Reducible matrices are accepted and
    /// flagged through [`is_irreducible`](Self::is_irreducible).
    pub fn validate(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (row, values) in rows.iter().enumerate() {
            if values.len() != n {
                return Err(MatrixError::NotSquare {
                    row,
                    len: values.len(),
                    expected: n,
                });
            }
            for (col, &value) in values.iter().enumerate() {
                if !value.is_finite() {
                    return Err(MatrixError::NonFinite { row, col });
                }
                if value < 0.0 {
                    return Err(MatrixError::NegativeEntry { row, col, value });
                }
                entries.push(value);
            }
        }
        Self::from_entries(n, entries, MatrixOrigin::Explicit)
    }

    fn from_entries(
        n: usize,
        entries: Vec<f64>,
        origin: MatrixOrigin,
    ) -> Result<Self, MatrixError> {
        for col in 0..n {
            let sum: f64 = (0..n).map(|row| entries[row * n + col]).sum();
            if sum > 1.0 + COLUMN_SUM_TOLERANCE {
                return Err(MatrixError::ColumnSumExceedsOne { col, sum });
            }
        }
        let mut matrix = Self {
            n,
            entries,
            irreducible: false,
            origin,
        };
        matrix.irreducible = strongly_connected_components(&matrix).components.len() == 1;
        Ok(matrix)
    }

    /// The symmetric one-parameter family with diagonal `γ*(ι/N + 1 − ι)` and
    /// off-diagonal `γ*ι/N`. Every column sums to `γ*`.
    pub fn mean_field(gamma_star: f64, iota: f64, n: usize) -> Result<Self, MatrixError> {
        if !(gamma_star > 0.0 && gamma_star <= 1.0) {
            return Err(MatrixError::ParameterOutOfRange {
                name: "gamma_star",
                value: gamma_star,
                expected: "(0, 1]",
            });
        }
        if !(iota > 0.0 && iota <= 1.0) {
            return Err(MatrixError::ParameterOutOfRange {
                name: "iota",
                value: iota,
                expected: "(0, 1]",
            });
        }
        if n == 0 {
            return Err(MatrixError::ParameterOutOfRange {
                name: "n",
                value: 0.0,
                expected: ">= 1",
            });
        }
        let off = gamma_star * iota / n as f64;
        let diag = gamma_star * (iota / n as f64 + (1.0 - iota));
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { diag } else { off })
            .collect();
        Self::from_entries(n, entries, MatrixOrigin::MeanField { gamma_star, iota })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.entries[source * self.n + target]
    }

    /// Row `source`: the weights it contributes to every target.
    #[inline]
    pub fn row(&self, source: usize) -> &[f64] {
        &self.entries[source * self.n..(source + 1) * self.n]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|col| (0..self.n).map(|row| self.get(row, col)).sum())
            .collect()
    }

    /// Whether the support digraph (edge `j → h` iff entry `(j, h) > 0`) is
    /// strongly connected.
    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn origin(&self) -> MatrixOrigin {
        self.origin
    }

    /// `Γᵀ s`, i.e. for each target `h` the weighted sum `Σ_j γ_{j,h} s_j`.
    pub fn weighted_inputs(&self, counts: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (source, &s) in counts.iter().enumerate() {
            if s != 0.0 {
                for (o, &g) in out.iter_mut().zip(self.row(source)) {
                    *o += g * s;
                }
            }
        }
        out
    }

    /// The matrix with processes relabelled so that new index `i` is old index
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, MatrixError> {
        let rows: Vec<Vec<f64>> = perm
            .iter()
            .map(|&j| perm.iter().map(|&h| self.get(j, h)).collect())
            .collect();
        let mut out = Self::validate(&rows)?;
        out.origin = self.origin;
        Ok(out)
    }
}
