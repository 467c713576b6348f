use rayon::prelude::*;

use super::{CheckpointSchedule, ModelParams, ReplicaRng, ShockSpec, SimError};
use crate::model::InteractionMatrix;
use crate::success::SuccessMatrix;

/// Recompute the weighted inputs from scratch this often to stop rounding
/// drift in the running sums.
const REFRESH_INTERVAL: u64 = 1 << 16;

/// State of the system at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    pub counts: Vec<u64>,
    /// `P_t`, the probabilities that will drive step `t → t+1`.
    pub probs: Vec<f64>,
    /// Row-major `N×N`, entry `(k, h)` = `S_{t,k,h}`. Present iff π is given.
    pub split: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub replica_id: u64,
    pub checkpoints: Vec<Checkpoint>,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.checkpoints.first().map_or(0, |c| c.counts.len())
    }

    pub fn times(&self) -> Vec<u64> {
        self.checkpoints.iter().map(|c| c.t).collect()
    }

    pub fn at(&self, t: u64) -> Option<&Checkpoint> {
        self.checkpoints
            .binary_search_by_key(&t, |c| c.t)
            .ok()
            .map(|i| &self.checkpoints[i])
    }
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy)]
pub struct Step<'a> {
    /// Time after the step.
    pub t: u64,
    pub outcomes: &'a [bool],
    pub category: Option<usize>,
}

/// Step-by-step simulator for one replica.
#[derive(Debug, Clone)]
pub struct Simulation {
    matrix: InteractionMatrix,
    theta: Vec<f64>,
    c: Vec<f64>,
    pi_cdf: Option<Vec<f64>>,
    shocks: Vec<ShockSpec>,
    next_shock: usize,
    rng: ReplicaRng,
    t: u64,
    counts: Vec<u64>,
    inputs: Vec<f64>,
    split: Option<Vec<u64>>,
    outcomes: Vec<bool>,
    category: Option<usize>,
}

impl Simulation {
    pub fn new(
        params: &ModelParams,
        matrix: &InteractionMatrix,
        seed: u64,
        replica_id: u64,
    ) -> Result<Self, SimError> {
        let n = matrix.n();
        params.validate(n, None)?;
        let pi_cdf = params.pi.as_ref().map(|pi| {
            let mut acc = 0.0;
            pi.iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        });
        let mut sim = Self {
            matrix: matrix.clone(),
            theta: params.theta.clone(),
            c: params.c.clone(),
            split: params.pi.as_ref().map(|_| vec![0; n * n]),
            pi_cdf,
            shocks: params.sorted_shocks(),
            next_shock: 0,
            rng: ReplicaRng::new(seed, replica_id),
            t: 0,
            counts: vec![0; n],
            inputs: vec![0.0; n],
            outcomes: vec![false; n],
            category: None,
        };
        sim.apply_due_shocks();
        Ok(sim)
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn split(&self) -> Option<&[u64]> {
        self.split.as_deref()
    }

    #[inline]
    fn prob(&self, h: usize) -> f64 {
        (self.theta[h] + self.inputs[h]) / (self.c[h] + self.t as f64)
    }

    /// Current `P_t`.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.n()).map(|h| self.prob(h)).collect()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            t: self.t,
            counts: self.counts.clone(),
            probs: self.probabilities(),
            split: self.split.clone(),
        }
    }

    fn apply_due_shocks(&mut self) {
        while let Some(s) = self.shocks.get(self.next_shock) {
            if s.t_shock > self.t {
                break;
            }
            self.theta[s.process - 1] = s.theta_new;
            self.c[s.process - 1] = s.c_new;
            self.next_shock += 1;
        }
    }

    fn refresh_inputs(&mut self) {
        let s: Vec<f64> = self.counts.iter().map(|&x| x as f64).collect();
        self.inputs = self.matrix.weighted_inputs(&s);
    }

    /// Advances one step: N Bernoulli draws in process order, then the source
    /// category when π is present.
    pub fn step(&mut self) -> Step<'_> {
        let n = self.n();
        for h in 0..n {
            let p = self.prob(h);
            self.outcomes[h] = self.rng.uniform() < p;
        }
        self.category = self.pi_cdf.as_ref().map(|cdf| {
            let u = self.rng.uniform();
            cdf.iter().position(|&f| u < f).unwrap_or(n - 1)
        });
        for h in 0..n {
            if self.outcomes[h] {
                self.counts[h] += 1;
                for (acc, &g) in self.inputs.iter_mut().zip(self.matrix.row(h)) {
                    *acc += g;
                }
                if let (Some(split), Some(k)) = (self.split.as_mut(), self.category) {
                    split[k * n + h] += 1;
                }
            }
        }
        self.t += 1;
        if self.t % REFRESH_INTERVAL == 0 {
            self.refresh_inputs();
        }
        self.apply_due_shocks();
        Step {
            t: self.t,
            outcomes: &self.outcomes,
            category: self.category,
        }
    }
}

fn check_schedule(schedule: &CheckpointSchedule, t_max: u64) -> Result<(), SimError> {
    if t_max == 0 {
        return Err(SimError::InvalidHorizon);
    }
    match schedule.points().iter().find(|&&t| t == 0 || t > t_max) {
        Some(&t) => Err(SimError::ScheduleOutOfRange { t, t_max }),
        None => Ok(()),
    }
}

/// One replica from `t = 0` to `t_max`, recording the scheduled checkpoints.
pub fn run_replica(
    params: &ModelParams,
    matrix: &InteractionMatrix,
    t_max: u64,
    seed: u64,
    replica_id: u64,
    schedule: &CheckpointSchedule,
) -> Result<Trajectory, SimError> {
    check_schedule(schedule, t_max)?;
    params.validate(matrix.n(), Some(t_max))?;
    let mut sim = Simulation::new(params, matrix, seed, replica_id)?;
    let mut checkpoints = Vec::with_capacity(schedule.len());
    for &target in schedule.points() {
        while sim.t() < target {
            sim.step();
        }
        checkpoints.push(sim.checkpoint());
    }
    Ok(Trajectory {
        seed,
        replica_id,
        checkpoints,
    })
}

/// Replicas `0..n_replicas`, run in parallel and returned in replica order.
pub fn run_ensemble(
    params: &ModelParams,
    matrix: &InteractionMatrix,
    t_max: u64,
    n_replicas: u64,
    master_seed: u64,
    schedule: &CheckpointSchedule,
) -> Result<Vec<Trajectory>, SimError> {
    if n_replicas == 0 {
        return Err(SimError::NoReplicas);
    }
    check_schedule(schedule, t_max)?;
    params.validate(matrix.n(), Some(t_max))?;
    (0..n_replicas)
        .into_par_iter()
        .map(|r| run_replica(params, matrix, t_max, master_seed, r, schedule))
        .collect()
}

/// The first `n_rows` outcome rows of one replica as a success matrix, with
/// the sampled source categories when π is present.
pub fn simulate_outcomes(
    params: &ModelParams,
    matrix: &InteractionMatrix,
    n_rows: u64,
    seed: u64,
    replica_id: u64,
) -> Result<SuccessMatrix, SimError> {
    if n_rows == 0 {
        return Err(SimError::InvalidHorizon);
    }
    params.validate(matrix.n(), Some(n_rows))?;
    let mut sim = Simulation::new(params, matrix, seed, replica_id)?;
    let mut out = SuccessMatrix::numbered(matrix.n());
    for _ in 0..n_rows {
        let step = sim.step();
        out.push_row(step.outcomes, step.category, None);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::success_probabilities;

    fn mf() -> InteractionMatrix {
        InteractionMatrix::mean_field(0.7, 0.9, 2).unwrap()
    }

    #[test]
    fn deterministic_replica() {
        let params = ModelParams::uniform(2, 0.5, 1.0).with_pi(vec![0.3, 0.7]);
        let sched = CheckpointSchedule::default_for(5000);
        let a = run_replica(&params, &mf(), 5000, 9, 4, &sched).unwrap();
        let b = run_replica(&params, &mf(), 5000, 9, 4, &sched).unwrap();
        assert_eq!(a, b);
        let c = run_replica(&params, &mf(), 5000, 9, 5, &sched).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ensemble_matches_sequential_runs() {
        let params = ModelParams::uniform(2, 0.5, 1.0);
        let sched = CheckpointSchedule::default_for(100);
        let ens = run_ensemble(&params, &mf(), 100, 2, 77, &sched).unwrap();
        let seq: Vec<_> = (0..2)
            .map(|r| run_replica(&params, &mf(), 100, 77, r, &sched).unwrap())
            .collect();
        assert_eq!(ens, seq);
    }

    #[test]
    fn checkpoint_invariants() {
        let params = ModelParams::uniform(2, 0.5, 1.0).with_pi(vec![0.5, 0.5]);
        let sched = CheckpointSchedule::default_for(20_000);
        let tr = run_replica(&params, &mf(), 20_000, 1, 0, &sched).unwrap();
        let mut prev = vec![0u64; 2];
        for cp in &tr.checkpoints {
            for h in 0..2 {
                assert!(cp.counts[h] >= prev[h] && cp.counts[h] <= cp.t);
                assert!(cp.probs[h] > 0.0 && cp.probs[h] <= 1.0);
                let split = cp.split.as_ref().unwrap();
                assert_eq!(split[h] + split[2 + h], cp.counts[h]);
            }
            prev = cp.counts.clone();
        }
    }

    #[test]
    fn incremental_probabilities_match_direct_formula() {
        let m = InteractionMatrix::validate(&[vec![0.5, 0.2], vec![0.45, 0.2]]).unwrap();
        let params = ModelParams::uniform(2, 0.5, 1.0).with_shock(ShockSpec {
            t_shock: 300,
            process: 2,
            theta_new: 40.0,
            c_new: 50.0,
        });
        let sched = CheckpointSchedule::geometric(1000, 20);
        let tr = run_replica(&params, &m, 1000, 3, 0, &sched).unwrap();
        for cp in &tr.checkpoints {
            let direct = success_probabilities(&cp.counts, cp.t, &params, &m);
            for (a, b) in cp.probs.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12, "t={} {a} {b}", cp.t);
            }
        }
    }

    #[test]
    fn schedule_must_fit_horizon() {
        let params = ModelParams::uniform(2, 0.5, 1.0);
        let sched = CheckpointSchedule::from_points(vec![5, 20], 20).unwrap();
        assert_eq!(
            run_replica(&params, &mf(), 10, 0, 0, &sched),
            Err(SimError::ScheduleOutOfRange { t: 20, t_max: 10 })
        );
        assert_eq!(
            run_ensemble(&params, &mf(), 10, 0, 0, &sched),
            Err(SimError::NoReplicas)
        );
    }

    #[test]
    fn outcomes_agree_with_trajectory() {
        let params = ModelParams::uniform(2, 0.5, 1.0).with_pi(vec![0.4, 0.6]);
        let x = simulate_outcomes(&params, &mf(), 500, 11, 2).unwrap();
        let sched = CheckpointSchedule::from_points(vec![500], 500).unwrap();
        let tr = run_replica(&params, &mf(), 500, 11, 2, &sched).unwrap();
        let cum = x.cumulative_at(&[500]);
        assert_eq!(cum[0].counts, tr.checkpoints[0].counts);
        assert_eq!(cum[0].split, tr.checkpoints[0].split);
    }
}
