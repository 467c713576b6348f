//! Monte Carlo generation of interacting reinforced Bernoulli processes.
//!
//! At each step `t → t+1` every process `h` succeeds independently (given the
//! past) with probability
//!
//! ```text
//! P_{t,h} = (θ_h + Σ_j γ_{j,h} S_{t,j}) / (c_h + t)
//! ```
//!
//! where `S_{t,j}` counts the successes of process `j` up to step `t`.

mod engine;
mod exact;
pub mod io;
mod moments;
mod rng;
mod schedule;

pub use engine::{
    run_ensemble, run_replica, simulate_outcomes, Checkpoint, Simulation, Step, Trajectory,
};
pub use exact::{
    enumerate_exact, exact_expected_counts, exact_expected_counts_at, ExactMoments,
    MAX_ENUMERATED_OUTCOMES,
};
pub use moments::{empirical_moments, Estimate, MomentEstimate};
pub use rng::{stream_seed, ReplicaRng};
pub use schedule::CheckpointSchedule;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::InteractionMatrix;

/// Tolerance on `Σ π_k = 1`.
pub const PI_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{name} has {len} components, expected {expected}")]
    ParamLength {
        name: &'static str,
        len: usize,
        expected: usize,
    },
    #[error("theta[{process}] = {value} must be positive and finite")]
    InvalidTheta { process: usize, value: f64 },
    #[error("c[{process}] = {value} must be finite and at least theta[{process}] = {theta}")]
    InvalidC { process: usize, value: f64, theta: f64 },
    #[error("pi: {0}")]
    InvalidPi(String),
    #[error("shocks[{index}]: {reason}")]
    InvalidShock { index: usize, reason: String },
    #[error("t_max must be at least 1")]
    InvalidHorizon,
    #[error("checkpoint {t} is outside 1..={t_max}")]
    ScheduleOutOfRange { t: u64, t_max: u64 },
    #[error("n_replicas must be at least 1")]
    NoReplicas,
    #[error("instance too large to enumerate: 2^{bits} outcome paths")]
    InstanceTooLarge { bits: usize },
    #[error("incompatible schedules: {0}")]
    IncompatibleSchedules(String),
}

/// A one-time replacement of `(θ, c)` for one process, applied before the
/// probabilities of step `t_shock` are computed and kept afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSpec {
    pub t_shock: u64,
    /// 1-based process index.
    pub process: usize,
    pub theta_new: f64,
    pub c_new: f64,
}

/// Initial-condition parameters, optional source-category distribution and
/// shock schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub theta: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shocks: Vec<ShockSpec>,
}

impl ModelParams {
    /// `θ_h = theta`, `c_h = c` for all `n` processes, no π, no shocks.
    pub fn uniform(n: usize, theta: f64, c: f64) -> Self {
        Self {
            theta: vec![theta; n],
            c: vec![c; n],
            pi: None,
            shocks: Vec::new(),
        }
    }

    pub fn with_pi(mut self, pi: Vec<f64>) -> Self {
        self.pi = Some(pi);
        self
    }

    pub fn with_shock(mut self, shock: ShockSpec) -> Self {
        self.shocks.push(shock);
        self
    }

    /// Checks the parameters against an `n`-process system. Shock times are
    /// checked against `t_max` when one is given.
    pub fn validate(&self, n: usize, t_max: Option<u64>) -> Result<(), SimError> {
        check_len("theta", self.theta.len(), n)?;
        check_len("c", self.c.len(), n)?;
        for (h, (&theta, &c)) in self.theta.iter().zip(&self.c).enumerate() {
            check_pair(h, theta, c)?;
        }
        if let Some(pi) = &self.pi {
            check_len("pi", pi.len(), n)?;
            if let Some((k, &p)) = pi
                .iter()
                .enumerate()
                .find(|(_, &p)| !(p > 0.0 && p < 1.0))
            {
                return Err(SimError::InvalidPi(format!("pi[{k}] = {p} is not in (0, 1)")));
            }
            let sum: f64 = pi.iter().sum();
            if (sum - 1.0).abs() > PI_SUM_TOLERANCE {
                return Err(SimError::InvalidPi(format!("components sum to {sum}, not 1")));
            }
        }
        for (index, shock) in self.shocks.iter().enumerate() {
            let fail = |reason: String| Err(SimError::InvalidShock { index, reason });
            if shock.t_shock == 0 {
                return fail("t_shock must be at least 1".into());
            }
            if let Some(t_max) = t_max {
                if shock.t_shock > t_max {
                    return fail(format!("t_shock {} exceeds t_max {t_max}", shock.t_shock));
                }
            }
            if shock.process == 0 || shock.process > n {
                return fail(format!("process {} is not in 1..={n}", shock.process));
            }
            if !(shock.theta_new > 0.0 && shock.theta_new.is_finite()) {
                return fail(format!("theta_new = {} must be positive", shock.theta_new));
            }
            if !(shock.c_new >= shock.theta_new && shock.c_new.is_finite()) {
                return fail(format!(
                    "c_new = {} must be at least theta_new = {}",
                    shock.c_new, shock.theta_new
                ));
            }
        }
        Ok(())
    }

    /// `(θ, c)` in force when the probabilities of step `t` are computed.
    pub fn effective_at(&self, t: u64) -> (Vec<f64>, Vec<f64>) {
        let mut theta = self.theta.clone();
        let mut c = self.c.clone();
        for shock in self.sorted_shocks() {
            if shock.t_shock <= t {
                theta[shock.process - 1] = shock.theta_new;
                c[shock.process - 1] = shock.c_new;
            }
        }
        (theta, c)
    }

    /// Shocks in application order (stable for equal times).
    pub(crate) fn sorted_shocks(&self) -> Vec<ShockSpec> {
        let mut shocks = self.shocks.clone();
        shocks.sort_by_key(|s| s.t_shock);
        shocks
    }
}

fn check_len(name: &'static str, len: usize, expected: usize) -> Result<(), SimError> {
    if len == expected {
        Ok(())
    } else {
        Err(SimError::ParamLength {
            name,
            len,
            expected,
        })
    }
}

fn check_pair(process: usize, theta: f64, c: f64) -> Result<(), SimError> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(SimError::InvalidTheta {
            process,
            value: theta,
        });
    }
    if !(c >= theta && c.is_finite()) {
        return Err(SimError::InvalidC {
            process,
            value: c,
            theta,
        });
    }
    Ok(())
}

/// `P_{t,h} = (θ_h + Σ_j γ_{j,h} S_{t,j}) / (c_h + t)`, with the `(θ, c)` in
/// force at step `t` (shocks due at or before `t` applied).
pub fn success_probabilities(
    counts: &[u64],
    t: u64,
    params: &ModelParams,
    matrix: &InteractionMatrix,
) -> Vec<f64> {
    let (theta, c) = params.effective_at(t);
    let s: Vec<f64> = counts.iter().map(|&x| x as f64).collect();
    matrix
        .weighted_inputs(&s)
        .iter()
        .zip(theta.iter().zip(&c))
        .map(|(input, (th, ch))| (th + input) / (ch + t as f64))
        .collect()
}
