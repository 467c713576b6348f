use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{InteractionMatrix, MatrixError, MatrixOrigin};

/// Relative-change stopping tolerance for power iteration.
pub const POWER_TOLERANCE: f64 = 1e-13;
/// Iteration cap for power iteration.
pub const POWER_MAX_ITERATIONS: usize = 1_000_000;

/// Perron eigenvalue and eigenvectors of an irreducible interaction matrix.
///
/// `v` is normalized so that `vᵀ𝟙 = 1` and `u` so that `vᵀu = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub gamma_star: f64,
    /// Left eigenvector (`uᵀΓ = γ* uᵀ`), the eigenvector centrality scores.
    pub u: Vec<f64>,
    /// Right eigenvector (`Γv = γ* v`).
    pub v: Vec<f64>,
    /// Largest real part among the remaining eigenvalues; `None` when `N = 1`.
    pub gamma2_real: Option<f64>,
    /// `Re(γ₂)/γ* < 1/2`.
    pub gap_ok: bool,
}

impl SpectralData {
    /// `max_h |(uᵀΓ)_h − γ* u_h|`.
    pub fn left_residual(&self, matrix: &InteractionMatrix) -> f64 {
        let ut_gamma = matrix.weighted_inputs(&self.u);
        ut_gamma
            .iter()
            .zip(&self.u)
            .map(|(a, b)| (a - self.gamma_star * b).abs())
            .fold(0.0, f64::max)
    }

    /// `max_j |(Γv)_j − γ* v_j|`.
    pub fn right_residual(&self, matrix: &InteractionMatrix) -> f64 {
        let n = matrix.n();
        (0..n)
            .map(|j| {
                let gv: f64 = matrix.row(j).iter().zip(&self.v).map(|(g, v)| g * v).sum();
                (gv - self.gamma_star * self.v[j]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Power iteration on `Γ + I` (right) and `Γᵀ + I` (left). The unit shift
/// makes the Perron root strictly dominant even for periodic matrices without
/// changing the eigenvectors.
pub fn perron(matrix: &InteractionMatrix) -> Result<SpectralData, MatrixError> {
    if !matrix.is_irreducible() {
        return Err(MatrixError::NotIrreducible);
    }
    let n = matrix.n();

    let mut v = power_iterate(n, |x, out| {
        for (j, o) in out.iter_mut().enumerate() {
            *o = x[j] + matrix.row(j).iter().zip(x).map(|(g, xi)| g * xi).sum::<f64>();
        }
    })?;
    let mut u = power_iterate(n, |x, out| {
        let y = matrix.weighted_inputs(x);
        for ((o, yi), xi) in out.iter_mut().zip(y).zip(x) {
            *o = yi + xi;
        }
    })?;

    // Rayleigh quotient with both eigenvectors: second-order accurate.
    let gamma_v: Vec<f64> = (0..n)
        .map(|j| matrix.row(j).iter().zip(&v).map(|(g, x)| g * x).sum())
        .collect();
    let num: f64 = u.iter().zip(&gamma_v).map(|(a, b)| a * b).sum();
    let den: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    let gamma_star = num / den;

    let v_sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= v_sum);
    let vu: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
    u.iter_mut().for_each(|x| *x /= vu);

    let gamma2_real = match matrix.origin() {
        _ if n == 1 => None,
        MatrixOrigin::MeanField { gamma_star, iota } => Some(gamma_star * (1.0 - iota)),
        MatrixOrigin::Explicit => Some(second_eigenvalue_real_part(matrix, gamma_star)),
    };
    let gap_ok = gamma2_real.map_or(true, |g2| g2 / gamma_star < 0.5);

    Ok(SpectralData {
        gamma_star,
        u,
        v,
        gamma2_real,
        gap_ok,
    })
}

fn power_iterate<F>(n: usize, apply: F) -> Result<Vec<f64>, MatrixError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut x = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..POWER_MAX_ITERATIONS {
        apply(&x, &mut next);
        let sum: f64 = next.iter().sum();
        next.iter_mut().for_each(|y| *y /= sum);
        let change = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = next.iter().cloned().fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if change <= POWER_TOLERANCE * scale {
            return Ok(x);
        }
    }
    Err(MatrixError::NoConvergence {
        iterations: POWER_MAX_ITERATIONS,
    })
}

/// Real Schur decomposition of the full matrix; the eigenvalue closest to the
/// Perron root is discarded and the largest remaining real part returned.
fn second_eigenvalue_real_part(matrix: &InteractionMatrix, gamma_star: f64) -> f64 {
    let n = matrix.n();
    let m = DMatrix::from_row_slice(n, n, matrix.entries());
    let eigenvalues = m.complex_eigenvalues();
    let perron_idx = eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let da = (a.1.re - gamma_star).hypot(a.1.im);
            let db = (b.1.re - gamma_star).hypot(b.1.im);
            da.total_cmp(&db)
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    eigenvalues
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != perron_idx)
        .map(|(_, z)| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}
