use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::InferenceError;
use crate::success::SuccessMatrix;

const GRID_STEP: f64 = 0.01;
const GRID_POINTS: usize = 100;
const REFINE_TOLERANCE: f64 = 1e-5;
const MAX_GOLDEN_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub iota_hat: f64,
    pub log_likelihood: f64,
    pub gamma_star_used: f64,
    /// Refinement reached its tolerance and the grid maximum was interior.
    pub converged: bool,
    /// The grid maximum was the first or last grid point.
    pub at_boundary: bool,
    pub theta: Vec<f64>,
    pub c: Vec<f64>,
    pub n_rows: usize,
}

/// Per-observation terms: `P_{n−1,h}(ι) = α + ι·β`.
struct Terms {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    x: Vec<u8>,
}

impl Terms {
    /// Under the mean-field matrix with parameters `(γ*, ι)`,
    /// `Σ_j γ_{j,h} S_j = γ*·S_h + ι·γ*·(S̄ − S_h)`.
    fn new(data: &SuccessMatrix, gamma_star: f64, theta: &[f64], c: &[f64]) -> Self {
        let n = data.n_cols();
        let size = data.n_rows() * n;
        let mut terms = Self {
            alpha: Vec::with_capacity(size),
            beta: Vec::with_capacity(size),
            x: Vec::with_capacity(size),
        };
        let mut s = vec![0u64; n];
        for row in 0..data.n_rows() {
            let s_bar = s.iter().sum::<u64>() as f64 / n as f64;
            let x = data.row(row);
            for h in 0..n {
                let denom = c[h] + row as f64;
                terms.alpha.push((theta[h] + gamma_star * s[h] as f64) / denom);
                terms.beta.push(gamma_star * (s_bar - s[h] as f64) / denom);
                terms.x.push(x[h]);
            }
            for h in 0..n {
                s[h] += x[h] as u64;
            }
        }
        terms
    }

    fn log_likelihood(&self, iota: f64) -> f64 {
        let mut ll = 0.0;
        for ((&a, &b), &x) in self.alpha.iter().zip(&self.beta).zip(&self.x) {
            let p = a + iota * b;
            ll += if x == 1 {
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                p.ln()
            } else {
                if p >= 1.0 {
                    return f64::NEG_INFINITY;
                }
                (-p).ln_1p()
            };
        }
        ll
    }
}

/// Maximum-likelihood `ι̂` over `(0, 1]` under the mean-field matrix with
/// known `γ*`: a 0.01 grid (smallest `ι` wins ties) refined by golden-section
/// search on the neighbouring grid cells.
pub fn mle_iota(
    data: &SuccessMatrix,
    gamma_star: f64,
    theta: &[f64],
    c: &[f64],
) -> Result<MleResult, InferenceError> {
    let n = data.n_cols();
    if data.n_rows() == 0 {
        return Err(InferenceError::EmptyData);
    }
    if !(gamma_star > 0.0 && gamma_star <= 1.0) {
        return Err(InferenceError::InvalidGammaStar(gamma_star));
    }
    if theta.len() != n || c.len() != n {
        return Err(InferenceError::ParameterLength {
            expected: n,
            theta: theta.len(),
            c: c.len(),
        });
    }
    if theta
        .iter()
        .zip(c)
        .any(|(&th, &ch)| !(th > 0.0 && ch >= th && ch.is_finite()))
    {
        return Err(InferenceError::InvalidInitialConditions);
    }
    let terms = Terms::new(data, gamma_star, theta, c);
    let grid: Vec<(f64, f64)> = (1..=GRID_POINTS)
        .into_par_iter()
        .map(|k| {
            let iota = k as f64 * GRID_STEP;
            (iota, terms.log_likelihood(iota))
        })
        .collect();
    let (best_idx, &(grid_iota, grid_ll)) = grid
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &(f64, f64))>, (i, cand)| match best {
            Some((_, b)) if b.1 >= cand.1 => best,
            _ => Some((i, cand)),
        })
        .unwrap();
    if grid_ll == f64::NEG_INFINITY {
        return Err(InferenceError::LikelihoodDegenerate);
    }
    let at_boundary = best_idx == 0 || best_idx == GRID_POINTS - 1;
    let lo = (grid_iota - GRID_STEP).max(f64::MIN_POSITIVE);
    let hi = (grid_iota + GRID_STEP).min(1.0);
    let (ref_iota, ref_ll, refined) = golden_max(|i| terms.log_likelihood(i), lo, hi);
    let (iota_hat, log_likelihood) = if ref_ll > grid_ll {
        (ref_iota, ref_ll)
    } else {
        (grid_iota, grid_ll)
    };
    Ok(MleResult {
        iota_hat,
        log_likelihood,
        gamma_star_used: gamma_star,
        converged: refined && !at_boundary,
        at_boundary,
        theta: theta.to_vec(),
        c: c.to_vec(),
        n_rows: data.n_rows(),
    })
}

/// Golden-section maximization on `[lo, hi]`; returns `(x, f(x), converged)`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64, bool) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    let mut converged = false;
    for _ in 0..MAX_GOLDEN_ITERATIONS {
        if hi - lo < REFINE_TOLERANCE {
            converged = true;
            break;
        }
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    if fa >= fb {
        (a, fa, converged)
    } else {
        (b, fb, converged)
    }
}
