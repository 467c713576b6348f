use crate::sim::Trajectory;
use crate::success::SuccessMatrix;

use super::EstimateError;

/// One observation time with its cumulative counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub t: u64,
    pub counts: Vec<f64>,
    /// Row-major `N×N` source-split counts `(k, h)`.
    pub split: Option<Vec<f64>>,
}

/// Points `(t, S_t)` for log-log regression, with `t` strictly increasing and
/// every count positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLogSample {
    labels: Vec<String>,
    points: Vec<SamplePoint>,
}

/// Where cumulative counts come from.
#[derive(Debug, Clone, Copy)]
pub enum CountSource<'a> {
    Trajectory(&'a Trajectory),
    Matrix(&'a SuccessMatrix),
}

impl LogLogSample {
    /// Builds a sample from explicit points, dropping those with a zero count
    /// in any category.
    pub fn from_points(
        labels: Vec<String>,
        points: Vec<SamplePoint>,
    ) -> Result<Self, EstimateError> {
        let n = labels.len();
        let mut prev = 0u64;
        for p in &points {
            if p.counts.len() != n || p.split.as_ref().is_some_and(|s| s.len() != n * n) {
                return Err(EstimateError::Shape(format!(
                    "point t={} does not have {n} categories",
                    p.t
                )));
            }
            if p.t <= prev {
                return Err(EstimateError::Shape(format!(
                    "t values must be positive and strictly increasing (t={} after {prev})",
                    p.t
                )));
            }
            if p.counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                return Err(EstimateError::Shape(format!("invalid count at t={}", p.t)));
            }
            prev = p.t;
        }
        let points: Vec<SamplePoint> = points
            .into_iter()
            .filter(|p| p.counts.iter().all(|&c| c > 0.0))
            .collect();
        if points.is_empty() {
            return Err(EstimateError::EmptySample);
        }
        Ok(Self { labels, points })
    }

    /// Every checkpoint of a trajectory.
    pub fn from_trajectory(trajectory: &Trajectory) -> Result<Self, EstimateError> {
        let n = trajectory.n();
        let points = trajectory
            .checkpoints
            .iter()
            .map(|c| SamplePoint {
                t: c.t,
                counts: c.counts.iter().map(|&x| x as f64).collect(),
                split: c.split.as_ref().map(|s| s.iter().map(|&x| x as f64).collect()),
            })
            .collect();
        Self::from_points(numbered(n), points)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn points(&self) -> &[SamplePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_split(&self) -> bool {
        self.points.iter().all(|p| p.split.is_some())
    }

    /// Points with `t_lo ≤ t ≤ t_hi`.
    pub fn window(&self, t_lo: u64, t_hi: u64) -> Result<Self, EstimateError> {
        let points: Vec<SamplePoint> = self
            .points
            .iter()
            .filter(|p| (t_lo..=t_hi).contains(&p.t))
            .cloned()
            .collect();
        if points.is_empty() {
            return Err(EstimateError::EmptySample);
        }
        Ok(Self {
            labels: self.labels.clone(),
            points,
        })
    }

    /// Keeps only the listed categories (and the matching split blocks).
    pub fn select(&self, categories: &[usize]) -> Result<Self, EstimateError> {
        let n = self.n();
        if let Some(&bad) = categories.iter().find(|&&h| h >= n) {
            return Err(EstimateError::InvalidCategory(bad));
        }
        let points = self
            .points
            .iter()
            .map(|p| SamplePoint {
                t: p.t,
                counts: categories.iter().map(|&h| p.counts[h]).collect(),
                split: p.split.as_ref().map(|s| {
                    categories
                        .iter()
                        .flat_map(|&k| categories.iter().map(move |&h| s[k * n + h]))
                        .collect()
                }),
            })
            .collect();
        Self::from_points(
            categories.iter().map(|&h| self.labels[h].clone()).collect(),
            points,
        )
    }
}

fn numbered(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// About `size` integers in `1..=t_max` with a constant ratio between
/// neighbours: every integer up to a cut-off `m`, then `m·r^k` up to `t_max`,
/// where `m` is the smallest cut-off at which `r` reaches `1 + 1/m` (so
/// floored grid values stay distinct).
pub fn geometric_times(t_max: u64, size: usize) -> Vec<u64> {
    if t_max == 0 || size == 0 {
        return Vec::new();
    }
    if size as u64 >= t_max {
        return (1..=t_max).collect();
    }
    if size == 1 {
        return vec![t_max];
    }
    let ratio = |m: usize| ((t_max as f64 / m as f64).ln() / (size - m) as f64).exp();
    let mut m = 1;
    while m + 1 < size && ratio(m) < 1.0 + 1.0 / m as f64 {
        m += 1;
    }
    let r = ratio(m);
    let mut ts: Vec<u64> = (1..=m as u64).collect();
    ts.extend((1..=size - m).map(|k| {
        ((m as f64 * r.powi(k as i32)).floor() as u64).clamp(1, t_max)
    }));
    *ts.last_mut().unwrap() = t_max;
    ts.dedup();
    ts
}

/// A geometrically spaced subsample of at most `size` points. For a
/// trajectory each grid time is mapped to the first checkpoint at or after it.
pub fn subsample(source: CountSource<'_>, size: usize) -> Result<LogLogSample, EstimateError> {
    if size < 10 {
        return Err(EstimateError::InvalidSize(size));
    }
    match source {
        CountSource::Trajectory(tr) => {
            let times = tr.times();
            let t_max = *times.last().ok_or(EstimateError::EmptySample)?;
            let mut idx: Vec<usize> = geometric_times(t_max, size)
                .into_iter()
                .map(|t| times.partition_point(|&x| x < t))
                .collect();
            idx.dedup();
            let sub = Trajectory {
                seed: tr.seed,
                replica_id: tr.replica_id,
                checkpoints: idx.into_iter().map(|i| tr.checkpoints[i].clone()).collect(),
            };
            LogLogSample::from_trajectory(&sub)
        }
        CountSource::Matrix(m) => {
            if m.n_rows() == 0 {
                return Err(EstimateError::EmptySample);
            }
            let ts = geometric_times(m.n_rows() as u64, size);
            let points = m
                .cumulative_at(&ts)
                .into_iter()
                .map(|c| SamplePoint {
                    t: c.t,
                    counts: c.counts.iter().map(|&x| x as f64).collect(),
                    split: c.split.map(|s| s.iter().map(|&x| x as f64).collect()),
                })
                .collect();
            LogLogSample::from_points(m.labels().to_vec(), points)
        }
    }
}
