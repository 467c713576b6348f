//! Log-gamma, the regularized upper incomplete gamma function and the
//! gamma-ratio `ζ_t(x) = Γ(t+x)/Γ(t)`.

use super::InferenceError;

const TERM_TOLERANCE: f64 = 1e-14;
const MAX_ITERATIONS: usize = 500;
/// Arguments are shifted up to at least this before the Stirling series.
const STIRLING_MIN: f64 = 10.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Stirling-series remainder `lnΓ(x) − [(x−½)ln x − x + ½ln 2π]`, `x ≥ 10`.
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0 + r2 * (1.0 / 1260.0 + r2 * (-1.0 / 1680.0 + r2 / 1188.0))))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut prod = 1.0;
    while x < STIRLING_MIN {
        prod *= x;
        x += 1.0;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_tail(x) - prod.ln()
}

/// Regularized upper incomplete gamma `Q(a, z) = Γ(a, z)/Γ(a)`.
///
/// Series for `P` when `z < a + 1`, Lentz continued fraction for `Q`
/// otherwise.
pub fn gamma_q(a: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    let log_prefactor = a * z.ln() - z - ln_gamma(a);
    if z < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..MAX_ITERATIONS {
            ap += 1.0;
            term *= z / ap;
            sum += term;
            if term.abs() < sum.abs() * TERM_TOLERANCE {
                break;
            }
        }
        (1.0 - sum * log_prefactor.exp()).clamp(0.0, 1.0)
    } else {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut b = z + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITERATIONS {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < TERM_TOLERANCE {
                break;
            }
        }
        (log_prefactor.exp() * h).clamp(0.0, 1.0)
    }
}

/// Survival function of the chi-square law with `k` degrees of freedom.
pub fn chisq_sf(x: f64, k: u32) -> Result<f64, InferenceError> {
    if x.is_nan() || x < 0.0 {
        return Err(InferenceError::NegativeArgument(x));
    }
    if k == 0 {
        return Err(InferenceError::InvalidDegreesOfFreedom);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_q(k as f64 / 2.0, x / 2.0))
}

/// `ζ_t(x) = Γ(t+x)/Γ(t)`, with `ζ_0(x) = 1`.
pub fn zeta(t: u64, x: f64) -> Result<f64, InferenceError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(InferenceError::NonpositiveX(x));
    }
    if t == 0 {
        return Ok(1.0);
    }
    Ok(ln_zeta(t as f64, x).exp())
}

/// `ln Γ(t+x) − ln Γ(t)` without forming the two large log-gammas.
fn ln_zeta(t: f64, x: f64) -> f64 {
    if t < STIRLING_MIN {
        // Γ(t+x)/Γ(t) = ζ_{t+m}(x) · Π_{i<m} (t+i)/(t+i+x)
        let mut ratio = 1.0;
        let mut s = t;
        while s < STIRLING_MIN {
            ratio *= s / (s + x);
            s += 1.0;
        }
        return ln_zeta(s, x) + ratio.ln();
    }
    let tx = t + x;
    let mut tail = 0.0;
    let coefficients = [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0];
    for (k, c) in coefficients.iter().enumerate() {
        let p = -(2 * k as i32 + 1);
        tail += c * (tx.powi(p) - t.powi(p));
    }
    (t - 0.5) * (x / t).ln_1p() + x * tx.ln() - x + tail
}
