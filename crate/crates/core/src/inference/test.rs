use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{chisq_sf, InferenceError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub iota0: f64,
    pub delta0: f64,
    /// Whether `ι₀ ∈ (½, 1]`, the range in which the null law holds.
    pub validity: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    /// Time step of the counts.
    pub t: u64,
    pub gamma_star: f64,
}

/// One-sided test of `H₀: ι ≥ ι₀` for the mean-field interaction:
/// `2(ι₀ − ½)·‖S − S̃𝟙‖²/S̃ ~ χ²(N−1)`, `S̃ = Σ_h S_h / N`.
///
/// `ι₀` outside `(½, 1]` is not an error: the result is flagged invalid, with
/// the statistic clamped at zero when `ι₀ ≤ ½`.
pub fn mean_field_test(
    counts: &[f64],
    t: u64,
    iota0: f64,
    gamma_star: f64,
) -> Result<TestResult, InferenceError> {
    let n = counts.len();
    if n < 2 {
        return Err(InferenceError::TooFewCategories(n));
    }
    if !iota0.is_finite() {
        return Err(InferenceError::InvalidIota(iota0));
    }
    if counts.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(InferenceError::InvalidCounts);
    }
    let s_bar = counts.iter().sum::<f64>() / n as f64;
    if s_bar <= 0.0 {
        return Err(InferenceError::AllZeroCounts);
    }
    let dispersion: f64 = counts.iter().map(|s| (s - s_bar).powi(2)).sum();
    let delta0 = iota0 - 0.5;
    let validity = delta0 > 0.0 && iota0 <= 1.0;
    let warning = (!validity).then(|| {
        format!("iota0 = {iota0} is outside (1/2, 1]; the chi-square null law does not apply")
    });
    let statistic = (2.0 * delta0 * dispersion / s_bar).max(0.0);
    let df = (n - 1) as u32;
    Ok(TestResult {
        statistic,
        df,
        p_value: chisq_sf(statistic, df)?,
        iota0,
        delta0,
        validity,
        warning,
        t,
        gamma_star,
    })
}

/// [`mean_field_test`] for each `ι₀` in turn.
pub fn test_sweep(
    counts: &[f64],
    t: u64,
    iota0s: &[f64],
    gamma_star: f64,
) -> Result<Vec<TestResult>, InferenceError> {
    iota0s
        .iter()
        .map(|&i| mean_field_test(counts, t, i, gamma_star))
        .collect()
}

/// Sweep as CSV: `iota0,statistic,p_value,validity`.
pub fn write_sweep_csv<W: Write>(results: &[TestResult], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iota0", "statistic", "p_value", "validity"])?;
    for r in results {
        w.write_record([
            r.iota0.to_string(),
            r.statistic.to_string(),
            r.p_value.to_string(),
            r.validity.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_counts() {
        let r = mean_field_test(&[5.0, 5.0, 5.0], 10, 0.8, 0.7).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.df, 2);
        assert!(r.validity && r.warning.is_none());
    }

    #[test]
    fn hand_computed_statistic() {
        // S̃ = 2, ‖S − S̃𝟙‖² = 2, Δ₀ = 0.25 → 2·0.25·2/2 = 0.5, df 1
        let r = mean_field_test(&[1.0, 3.0], 4, 0.75, 0.7).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-15);
        assert!((r.delta0 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn invalid_iota_is_flagged() {
        let r = mean_field_test(&[1.0, 3.0], 4, 0.4, 0.7).unwrap();
        assert!(!r.validity);
        assert!(r.warning.is_some());
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!mean_field_test(&[1.0, 3.0], 4, 1.2, 0.7).unwrap().validity);
    }

    #[test]
    fn errors() {
        assert_eq!(
            mean_field_test(&[0.0, 0.0], 4, 0.75, 0.7),
            Err(InferenceError::AllZeroCounts)
        );
        assert_eq!(
            mean_field_test(&[3.0], 4, 0.75, 0.7),
            Err(InferenceError::TooFewCategories(1))
        );
    }

    #[test]
    fn sweep_csv() {
        let rs = test_sweep(&[1.0, 3.0], 4, &[0.6, 0.9], 0.7).unwrap();
        assert!(rs[0].p_value >= rs[1].p_value);
        let mut buf = Vec::new();
        write_sweep_csv(&rs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iota0,statistic,p_value,validity\n0.6,"));
        assert_eq!(text.lines().count(), 3);
    }
}
