use super::{SimError, Trajectory};

/// A sample estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// Cross-replica moments of the step-`t` increments `X_t = S_t − S_{t−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub t: u64,
    pub mean: Vec<Estimate>,
    pub var: Vec<Estimate>,
    /// Row-major `N×N`.
    pub cov: Vec<Estimate>,
    /// Row-major `N×N`; `NaN` value where a sample variance is zero.
    pub corr: Vec<Estimate>,
}

/// Sample moments of `X_t` for each requested `t`. Every trajectory must carry
/// the same checkpoint times, including `t` and `t − 1` (for `t > 1`).
///
/// Standard errors: `sd(x)/√R` for the mean; for the (co)variance the
/// finite-sample form `var(z)/R + (s_xy² + s_x²s_y²)/(R(R−1))`, with `z` the
/// per-replica centred cross-product; `(1 − r²)/√(R − 1)` for the correlation.
pub fn empirical_moments(
    ensemble: &[Trajectory],
    t_points: &[u64],
) -> Result<Vec<MomentEstimate>, SimError> {
    let first = ensemble
        .first()
        .ok_or_else(|| SimError::IncompatibleSchedules("empty ensemble".into()))?;
    let times = first.times();
    if let Some(tr) = ensemble.iter().find(|tr| tr.times() != times) {
        return Err(SimError::IncompatibleSchedules(format!(
            "replica {} has a different checkpoint schedule from replica {}",
            tr.replica_id, first.replica_id
        )));
    }
    let n = first.n();
    let r = ensemble.len();
    let locate = |t: u64| {
        times
            .binary_search(&t)
            .map_err(|_| SimError::IncompatibleSchedules(format!("checkpoint {t} is missing")))
    };
    let mut out = Vec::with_capacity(t_points.len());
    for &t in t_points {
        if t == 0 {
            return Err(SimError::IncompatibleSchedules("t must be at least 1".into()));
        }
        let i = locate(t)?;
        let prev = if t > 1 { Some(locate(t - 1)?) } else { None };
        // x[rep * n + h]
        let x: Vec<f64> = ensemble
            .iter()
            .flat_map(|tr| {
                let now = &tr.checkpoints[i].counts;
                let before = prev.map(|p| &tr.checkpoints[p].counts);
                (0..n).map(move |h| (now[h] - before.map_or(0, |b| b[h])) as f64)
            })
            .collect();
        let means: Vec<f64> = (0..n)
            .map(|h| (0..r).map(|k| x[k * n + h]).sum::<f64>() / r as f64)
            .collect();
        let mean = (0..n)
            .map(|h| {
                let col: Vec<f64> = (0..r).map(|k| x[k * n + h]).collect();
                Estimate {
                    value: means[h],
                    se: sample_sd(&col) / (r as f64).sqrt(),
                }
            })
            .collect();
        let rf = r as f64;
        let bessel = if r > 1 { rf / (rf - 1.0) } else { 1.0 };
        // Mean and population variance of the centred cross-products.
        let (products, spread): (Vec<f64>, Vec<f64>) = (0..n * n)
            .map(|idx| {
                let (h, j) = (idx / n, idx % n);
                let z: Vec<f64> = (0..r)
                    .map(|k| (x[k * n + h] - means[h]) * (x[k * n + j] - means[j]))
                    .collect();
                let m = z.iter().sum::<f64>() / rf;
                (m, z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / rf)
            })
            .unzip();
        let cov: Vec<Estimate> = (0..n * n)
            .map(|idx| {
                let (h, j) = (idx / n, idx % n);
                let s = |i: usize| products[i] * bessel;
                let se = if r > 1 {
                    (spread[idx] / rf
                        + (s(idx).powi(2) + s(h * n + h) * s(j * n + j)) / (rf * (rf - 1.0)))
                        .sqrt()
                } else {
                    0.0
                };
                Estimate { value: s(idx), se }
            })
            .collect();
        let var = (0..n).map(|h| cov[h * n + h]).collect::<Vec<_>>();
        let corr = (0..n * n)
            .map(|idx| {
                let (h, j) = (idx / n, idx % n);
                let d = (var[h].value * var[j].value).sqrt();
                if d > 0.0 {
                    let rho = cov[idx].value / d;
                    Estimate {
                        value: rho,
                        se: (1.0 - rho * rho) / ((r as f64 - 1.0).max(1.0)).sqrt(),
                    }
                } else {
                    Estimate {
                        value: f64::NAN,
                        se: f64::NAN,
                    }
                }
            })
            .collect();
        out.push(MomentEstimate {
            t,
            mean,
            var,
            cov,
            corr,
        });
    }
    Ok(out)
}

fn sample_sd(z: &[f64]) -> f64 {
    let r = z.len();
    if r < 2 {
        return 0.0;
    }
    let m = z.iter().sum::<f64>() / r as f64;
    (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (r - 1) as f64).sqrt()
}
