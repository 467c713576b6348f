//! Exact oracles: the linear recursion for `E[S_t]` and the full law of the
//! increments for small instances.

use std::collections::BTreeMap;

use super::{success_probabilities, ModelParams, SimError};
use crate::model::InteractionMatrix;

/// Largest `N·t_max` accepted by [`enumerate_exact`].
pub const MAX_ENUMERATED_OUTCOMES: usize = 20;

/// `E[S_t]` for `t = 0..=t_max` from
/// `E[S_{t+1}] = E[S_t] + (θ + Γᵀ E[S_t]) ⊘ (c + t)`, with `(θ, c)` switched at
/// shock times.
pub fn exact_expected_counts(
    params: &ModelParams,
    matrix: &InteractionMatrix,
    t_max: u64,
) -> Result<Vec<Vec<f64>>, SimError> {
    let mut out = Vec::with_capacity(t_max as usize + 1);
    recurse(params, matrix, t_max, |_, s| out.push(s.to_vec()))?;
    Ok(out)
}

/// `E[S_t]` at the sorted checkpoint times `ts` only (memory `O(|ts|)`).
pub fn exact_expected_counts_at(
    params: &ModelParams,
    matrix: &InteractionMatrix,
    ts: &[u64],
) -> Result<Vec<Vec<f64>>, SimError> {
    let t_max = ts.iter().copied().max().unwrap_or(0);
    let mut out = Vec::with_capacity(ts.len());
    let mut next = 0;
    recurse(params, matrix, t_max, |t, s| {
        while next < ts.len() && ts[next] == t {
            out.push(s.to_vec());
            next += 1;
        }
    })?;
    Ok(out)
}

fn recurse(
    params: &ModelParams,
    matrix: &InteractionMatrix,
    t_max: u64,
    mut visit: impl FnMut(u64, &[f64]),
) -> Result<(), SimError> {
    let n = matrix.n();
    params.validate(n, None)?;
    let shocks = params.sorted_shocks();
    let mut next_shock = 0;
    let (mut theta, mut c) = (params.theta.clone(), params.c.clone());
    let mut s = vec![0.0; n];
    for t in 0..=t_max {
        visit(t, &s);
        if t == t_max {
            break;
        }
        while next_shock < shocks.len() && shocks[next_shock].t_shock <= t {
            let sh = shocks[next_shock];
            theta[sh.process - 1] = sh.theta_new;
            c[sh.process - 1] = sh.c_new;
            next_shock += 1;
        }
        let inputs = matrix.weighted_inputs(&s);
        for h in 0..n {
            s[h] += (theta[h] + inputs[h]) / (c[h] + t as f64);
        }
    }
    Ok(())
}

/// Exact moments of the step-`t` increments `X_t = S_t − S_{t−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub t: u64,
    pub mean_counts: Vec<f64>,
    /// `Var[X_{t,h}]`.
    pub var: Vec<f64>,
    /// Row-major `N×N` covariance of `X_t`.
    pub cov: Vec<f64>,
    /// Row-major `N×N` correlation of `X_t`; `NaN` where a variance is zero.
    pub corr: Vec<f64>,
}

/// Exact law of `S_t` for `t ≤ t_max`, propagated over the reachable count
/// vectors (outcome paths that lead to the same counts are merged, which is
/// exact because `P_t` depends on the past only through `S_t`).
pub fn enumerate_exact(
    params: &ModelParams,
    matrix: &InteractionMatrix,
    t_max: u64,
) -> Result<Vec<ExactMoments>, SimError> {
    let n = matrix.n();
    let bits = n.saturating_mul(t_max as usize);
    if bits > MAX_ENUMERATED_OUTCOMES {
        return Err(SimError::InstanceTooLarge { bits });
    }
    params.validate(n, Some(t_max.max(1)))?;
    let mut law: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    law.insert(vec![0; n], 1.0);
    let mut out = Vec::with_capacity(t_max as usize);
    for t in 0..t_max {
        let mut next: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        let mut ex = vec![0.0; n];
        let mut exx = vec![0.0; n * n];
        for (s, &w) in &law {
            let p = success_probabilities(s, t, params, matrix);
            for mask in 0u64..(1 << n) {
                let mut prob = w;
                let mut s_next = s.clone();
                for h in 0..n {
                    if mask >> h & 1 == 1 {
                        prob *= p[h];
                        s_next[h] += 1;
                    } else {
                        prob *= 1.0 - p[h];
                    }
                }
                if prob == 0.0 {
                    continue;
                }
                for h in 0..n {
                    if mask >> h & 1 == 1 {
                        ex[h] += prob;
                        for j in 0..n {
                            if mask >> j & 1 == 1 {
                                exx[h * n + j] += prob;
                            }
                        }
                    }
                }
                *next.entry(s_next).or_insert(0.0) += prob;
            }
        }
        law = next;
        let mut mean_counts = vec![0.0; n];
        for (s, &w) in &law {
            for h in 0..n {
                mean_counts[h] += w * s[h] as f64;
            }
        }
        let cov: Vec<f64> = (0..n * n)
            .map(|k| exx[k] - ex[k / n] * ex[k % n])
            .collect();
        let var: Vec<f64> = (0..n).map(|h| cov[h * n + h]).collect();
        let corr = (0..n * n)
            .map(|k| {
                let d = (var[k / n] * var[k % n]).sqrt();
                if d > 0.0 {
                    cov[k] / d
                } else {
                    f64::NAN
                }
            })
            .collect();
        out.push(ExactMoments {
            t: t + 1,
            mean_counts,
            var,
            cov,
            corr,
        });
    }
    Ok(out)
}
