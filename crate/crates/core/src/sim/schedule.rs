use serde::{Deserialize, Serialize};

use super::SimError;

/// Sorted, deduplicated checkpoint times within `1..=t_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CheckpointSchedule(Vec<u64>);

impl CheckpointSchedule {
    /// `{⌊10^{k/per_decade}⌋ : k = 0..=per_decade·log₁₀(t_max)}` plus `t_max`.
    pub fn geometric(t_max: u64, per_decade: u32) -> Self {
        let mut points = Vec::new();
        if t_max == 0 {
            return Self(points);
        }
        let decades = (t_max as f64).log10();
        let k_max = (decades * per_decade as f64 + 1e-9).floor() as u64;
        for k in 0..=k_max {
            let t = 10f64.powf(k as f64 / per_decade as f64).floor() as u64;
            if (1..=t_max).contains(&t) {
                points.push(t);
            }
        }
        points.push(t_max);
        points.sort_unstable();
        points.dedup();
        Self(points)
    }

    /// Default grid: 200 points per decade.
    pub fn default_for(t_max: u64) -> Self {
        Self::geometric(t_max, 200)
    }

    pub fn from_points(mut points: Vec<u64>, t_max: u64) -> Result<Self, SimError> {
        if let Some(&t) = points.iter().find(|&&t| t == 0 || t > t_max) {
            return Err(SimError::ScheduleOutOfRange { t, t_max });
        }
        points.sort_unstable();
        points.dedup();
        Ok(Self(points))
    }

    /// Every `t` in `points` together with `t − 1` (when positive), as needed
    /// to recover the step-`t` increments.
    pub fn with_predecessors(points: &[u64], t_max: u64) -> Result<Self, SimError> {
        let mut all = Vec::with_capacity(points.len() * 2);
        for &t in points {
            all.push(t);
            if t > 1 {
                all.push(t - 1);
            }
        }
        Self::from_points(all, t_max)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut points: Vec<u64> = self.0.iter().chain(&other.0).copied().collect();
        points.sort_unstable();
        points.dedup();
        Self(points)
    }

    pub fn points(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, t: u64) -> bool {
        self.0.binary_search(&t).is_ok()
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid() {
        let s = CheckpointSchedule::geometric(1000, 200);
        assert_eq!(s.points()[0], 1);
        assert_eq!(s.last(), Some(1000));
        assert!(s.points().windows(2).all(|w| w[0] < w[1]));
        // Below t ≈ 86 consecutive grid values collide, so every integer up to
        // there appears once; above it each k gives a new point.
        assert_eq!(s.len(), 299);
        assert!((1..=86).all(|t| s.contains(t)));
        let odd = CheckpointSchedule::geometric(1234, 10);
        assert_eq!(odd.last(), Some(1234));
    }

    #[test]
    fn explicit_points() {
        let s = CheckpointSchedule::from_points(vec![5, 1, 5, 3], 10).unwrap();
        assert_eq!(s.points(), &[1, 3, 5]);
        assert_eq!(
            CheckpointSchedule::from_points(vec![0], 10),
            Err(SimError::ScheduleOutOfRange { t: 0, t_max: 10 })
        );
        assert!(CheckpointSchedule::from_points(vec![11], 10).is_err());
        let p = CheckpointSchedule::with_predecessors(&[1, 100], 100).unwrap();
        assert_eq!(p.points(), &[1, 99, 100]);
    }
}
