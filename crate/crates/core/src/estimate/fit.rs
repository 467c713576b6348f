use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{EstimateError, LogLogSample};

/// Free (per-category) and common-slope least-squares fits of
/// `log₁₀ S_{t,h}` on `log₁₀ t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub labels: Vec<String>,
    pub n_points: usize,
    /// Per-category slopes of the free model.
    pub slopes: Vec<f64>,
    /// Per-category intercepts of the free model.
    pub free_intercepts: Vec<f64>,
    pub common_slope: f64,
    /// Per-category intercepts of the common-slope model.
    pub intercepts: Vec<f64>,
    pub r2_free: f64,
    pub r2_common: f64,
    /// Sample standard deviation of the free slopes (0 for one category).
    pub slope_sd: f64,
}

struct Design {
    x: Vec<f64>,
    /// y[h][i]
    y: Vec<Vec<f64>>,
    x_mean: f64,
    sxx: f64,
}

fn design(sample: &LogLogSample) -> Result<Design, EstimateError> {
    if sample.len() < 3 {
        return Err(EstimateError::TooFewPoints {
            have: sample.len(),
            need: 3,
        });
    }
    let x: Vec<f64> = sample.points().iter().map(|p| (p.t as f64).log10()).collect();
    let y: Vec<Vec<f64>> = (0..sample.n())
        .map(|h| sample.points().iter().map(|p| p.counts[h].log10()).collect())
        .collect();
    let x_mean = mean(&x);
    let sxx: f64 = x.iter().map(|v| (v - x_mean).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(EstimateError::DegenerateDesign("all t values are equal".into()));
    }
    Ok(Design { x, y, x_mean, sxx })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn fit_heaps(sample: &LogLogSample) -> Result<FitResult, EstimateError> {
    let d = design(sample)?;
    let n = sample.n();
    let y_means: Vec<f64> = d.y.iter().map(|y| mean(y)).collect();
    let sxy: Vec<f64> = d
        .y
        .iter()
        .zip(&y_means)
        .map(|(y, ym)| {
            d.x.iter()
                .zip(y)
                .map(|(x, y)| (x - d.x_mean) * (y - ym))
                .sum()
        })
        .collect();
    let slopes: Vec<f64> = sxy.iter().map(|s| s / d.sxx).collect();
    let free_intercepts: Vec<f64> = (0..n).map(|h| y_means[h] - slopes[h] * d.x_mean).collect();
    let common_slope = sxy.iter().sum::<f64>() / (d.sxx * n as f64);
    let intercepts: Vec<f64> = y_means.iter().map(|ym| ym - common_slope * d.x_mean).collect();

    let grand = y_means.iter().sum::<f64>() / n as f64;
    let mut sst = 0.0;
    let mut ssr_free = 0.0;
    let mut ssr_common = 0.0;
    for h in 0..n {
        for (x, y) in d.x.iter().zip(&d.y[h]) {
            sst += (y - grand).powi(2);
            ssr_free += (y - free_intercepts[h] - slopes[h] * x).powi(2);
            ssr_common += (y - intercepts[h] - common_slope * x).powi(2);
        }
    }
    if sst <= 0.0 {
        return Err(EstimateError::DegenerateDesign("all counts are equal".into()));
    }
    let slope_sd = if n > 1 {
        let m = mean(&slopes);
        (slopes.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(FitResult {
        labels: sample.labels().to_vec(),
        n_points: sample.len(),
        slopes,
        free_intercepts,
        common_slope,
        intercepts,
        r2_free: 1.0 - ssr_free / sst,
        r2_common: 1.0 - ssr_common / sst,
        slope_sd,
    })
}

/// `û_h/û_baseline = 10^(intercept_h − intercept_baseline)` from the
/// common-slope intercepts.
pub fn centrality_ratios(fit: &FitResult, baseline: usize) -> Result<Vec<f64>, EstimateError> {
    let base = *fit
        .intercepts
        .get(baseline)
        .ok_or(EstimateError::InvalidCategory(baseline))?;
    Ok(fit
        .intercepts
        .iter()
        .enumerate()
        .map(|(h, a)| if h == baseline { 1.0 } else { 10f64.powf(a - base) })
        .collect())
}

/// Fixed-slope fits of the source-split series `S_{t,k,h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFit {
    pub labels: Vec<String>,
    pub gamma_star: f64,
    pub baseline: usize,
    /// Row-major `N×N` `(k, h)`; `None` when the series has no positive point.
    pub intercepts: Vec<Option<f64>>,
    /// Row-major `N×N` `(k, h)`: `π̂_k/π̂_baseline` estimated in target `h`.
    pub ratios: Vec<Option<f64>>,
    /// Points used per series.
    pub n_points: Vec<usize>,
    /// R² of the fixed-slope model over all stacked split series.
    pub r2: f64,
}

/// Intercepts of `log₁₀ S_{t,k,h} = a_{k,h} + γ* log₁₀ t` by least squares
/// with the slope pinned; points with a zero split count are skipped per
/// series.
pub fn fit_split(
    sample: &LogLogSample,
    gamma_star: f64,
    baseline: usize,
) -> Result<SplitFit, EstimateError> {
    if !sample.has_split() {
        return Err(EstimateError::MissingSplit);
    }
    let n = sample.n();
    if baseline >= n {
        return Err(EstimateError::InvalidCategory(baseline));
    }
    let mut intercepts = vec![None; n * n];
    let mut n_points = vec![0; n * n];
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n * n];
    for p in sample.points() {
        let x = (p.t as f64).log10();
        for (idx, &s) in p.split.as_ref().unwrap().iter().enumerate() {
            if s > 0.0 {
                series[idx].push((x, s.log10()));
            }
        }
    }
    for (idx, pts) in series.iter().enumerate() {
        n_points[idx] = pts.len();
        if !pts.is_empty() {
            let a = pts.iter().map(|(x, y)| y - gamma_star * x).sum::<f64>() / pts.len() as f64;
            intercepts[idx] = Some(a);
        }
    }
    let all: Vec<f64> = series.iter().flatten().map(|(_, y)| *y).collect();
    let grand = mean(&all);
    let sst: f64 = all.iter().map(|y| (y - grand).powi(2)).sum();
    let ssr: f64 = series
        .iter()
        .zip(&intercepts)
        .flat_map(|(pts, a)| pts.iter().map(move |(x, y)| (y - a.unwrap() - gamma_star * x).powi(2)))
        .sum();
    let ratios = (0..n * n)
        .map(|idx| {
            let h = idx % n;
            match (intercepts[idx], intercepts[baseline * n + h]) {
                (Some(a), Some(b)) => Some(10f64.powf(a - b)),
                _ => None,
            }
        })
        .collect();
    Ok(SplitFit {
        labels: sample.labels().to_vec(),
        gamma_star,
        baseline,
        intercepts,
        ratios,
        n_points,
        r2: if sst > 0.0 { 1.0 - ssr / sst } else { f64::NAN },
    })
}

/// Per-point observed and common-slope fitted values as CSV
/// (`category,t,observed,fitted`), in count units.
pub fn write_fitted_lines<W: Write>(
    sample: &LogLogSample,
    fit: &FitResult,
    writer: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["category", "t", "observed", "fitted"])?;
    for (h, label) in sample.labels().iter().enumerate() {
        for p in sample.points() {
            let fitted = 10f64.powf(fit.intercepts[h] + fit.common_slope * (p.t as f64).log10());
            w.write_record([
                label.clone(),
                p.t.to_string(),
                p.counts[h].to_string(),
                format!("{fitted:e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
