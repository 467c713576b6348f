//! C ABI over `reinforced-core`: interaction matrices, their spectral data,
//! a step-by-step simulator and the mean-field test helpers.
//!
//! Every fallible function returns an `int32_t` status (`RF_OK` on success)
//! and writes results through out-pointers. On failure the message is kept
//! per thread and read back with [`rf_last_error`]. Handles are opaque and
//! must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use reinforced_core::inference;
use reinforced_core::model::{growth_exponents, perron, InteractionMatrix};
use reinforced_core::sim::{ModelParams, Simulation};

pub const RF_OK: i32 = 0;
pub const RF_NULL_POINTER: i32 = 1;
pub const RF_INVALID_ARGUMENT: i32 = 2;
pub const RF_NUMERICAL: i32 = 3;
pub const RF_PANIC: i32 = 4;

/// An interaction matrix Γ.
pub struct RfMatrix(InteractionMatrix);

/// One simulation replica.
pub struct RfSimulation(Simulation);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(i32, String);

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure(RF_INVALID_ARGUMENT, e.to_string())
}

fn null(name: &str) -> Failure {
    Failure(RF_NULL_POINTER, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RF_OK
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            RF_PANIC
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(p: *mut T, v: T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    *p = v;
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a matrix from `n*n` row-major entries (row = source process).
///
/// # Safety
/// `entries` must point to `n*n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_matrix_new(
    n: usize,
    entries: *const f64,
    out: *mut *mut RfMatrix,
) -> i32 {
    guard(|| {
        let len = n.checked_mul(n).ok_or_else(|| invalid("n is too large"))?;
        let e = slice(entries, len, "entries")?;
        let rows: Vec<Vec<f64>> = e.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let m = InteractionMatrix::validate(&rows).map_err(invalid)?;
        write(out, Box::into_raw(Box::new(RfMatrix(m))), "out")
    })
}

/// Mean-field matrix: diagonal `gamma_star*(iota/n + 1 - iota)`, off-diagonal
/// `gamma_star*iota/n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_matrix_mean_field(
    gamma_star: f64,
    iota: f64,
    n: usize,
    out: *mut *mut RfMatrix,
) -> i32 {
    guard(|| {
        let m = InteractionMatrix::mean_field(gamma_star, iota, n).map_err(invalid)?;
        write(out, Box::into_raw(Box::new(RfMatrix(m))), "out")
    })
}

/// # Safety
/// `matrix` must come from `rf_matrix_new` or `rf_matrix_mean_field` and not
/// be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rf_matrix_free(matrix: *mut RfMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Number of processes, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rf_matrix_n(matrix: *const RfMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.n())
}

/// Perron root and normalized left/right eigenvectors. `u` and `v` may be
/// null; otherwise each must hold `n` doubles.
///
/// # Safety
/// Pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn rf_perron(
    matrix: *const RfMatrix,
    gamma_star: *mut f64,
    u: *mut f64,
    v: *mut f64,
) -> i32 {
    guard(|| {
        let m = &handle(matrix, "matrix")?.0;
        let s = perron(m).map_err(|e| Failure(RF_NUMERICAL, e.to_string()))?;
        write(gamma_star, s.gamma_star, "gamma_star")?;
        if !u.is_null() {
            slice_mut(u, m.n(), "u")?.copy_from_slice(&s.u);
        }
        if !v.is_null() {
            slice_mut(v, m.n(), "v")?.copy_from_slice(&s.v);
        }
        Ok(())
    })
}

/// Predicted growth exponent of each process; `exponents` holds `n` doubles.
///
/// # Safety
/// Pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn rf_growth_exponents(matrix: *const RfMatrix, exponents: *mut f64) -> i32 {
    guard(|| {
        let m = &handle(matrix, "matrix")?.0;
        let g = growth_exponents(m);
        slice_mut(exponents, m.n(), "exponents")?.copy_from_slice(&g.exponent);
        Ok(())
    })
}

/// Upper tail of the chi-square distribution with `k` degrees of freedom.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_chisq_sf(x: f64, k: u32, out: *mut f64) -> i32 {
    guard(|| {
        let p = inference::chisq_sf(x, k).map_err(invalid)?;
        write(out, p, "out")
    })
}

/// `Γ(t + x)/Γ(t)`, with 1 at `t = 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_zeta(t: u64, x: f64, out: *mut f64) -> i32 {
    guard(|| {
        let z = inference::zeta(t, x).map_err(invalid)?;
        write(out, z, "out")
    })
}

/// Mean-field test of `n` counts. `valid` receives 1 when `iota0` lies in
/// the range where the null law holds, else 0.
///
/// # Safety
/// `counts` must hold `n` doubles; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_mean_field_test(
    counts: *const f64,
    n: usize,
    t: u64,
    iota0: f64,
    gamma_star: f64,
    statistic: *mut f64,
    p_value: *mut f64,
    valid: *mut i32,
) -> i32 {
    guard(|| {
        let c = slice(counts, n, "counts")?;
        let r = inference::mean_field_test(c, t, iota0, gamma_star).map_err(invalid)?;
        write(statistic, r.statistic, "statistic")?;
        write(p_value, r.p_value, "p_value")?;
        write(valid, r.validity as i32, "valid")
    })
}

/// A simulator for replica `replica_id` of master seed `seed`. `theta` and
/// `c` hold `n` doubles each; `pi` may be null, otherwise `n` doubles.
///
/// # Safety
/// Pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn rf_simulation_new(
    matrix: *const RfMatrix,
    theta: *const f64,
    c: *const f64,
    pi: *const f64,
    seed: u64,
    replica_id: u64,
    out: *mut *mut RfSimulation,
) -> i32 {
    guard(|| {
        let m = &handle(matrix, "matrix")?.0;
        let n = m.n();
        let params = ModelParams {
            theta: slice(theta, n, "theta")?.to_vec(),
            c: slice(c, n, "c")?.to_vec(),
            pi: if pi.is_null() {
                None
            } else {
                Some(slice(pi, n, "pi")?.to_vec())
            },
            shocks: Vec::new(),
        };
        let sim = Simulation::new(&params, m, seed, replica_id).map_err(invalid)?;
        write(out, Box::into_raw(Box::new(RfSimulation(sim))), "out")
    })
}

/// # Safety
/// `sim` must come from `rf_simulation_new` and not be used afterwards. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn rf_simulation_free(sim: *mut RfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances one step. `outcomes` may be null, otherwise it receives `n`
/// bytes (1 = success). `category` may be null; it receives the sampled
/// source category or -1 when the simulator has no π.
///
/// # Safety
/// Pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn rf_simulation_step(
    sim: *mut RfSimulation,
    outcomes: *mut u8,
    category: *mut i64,
) -> i32 {
    guard(|| {
        let s = &mut sim.as_mut().ok_or_else(|| null("sim"))?.0;
        let n = s.n();
        let step = s.step();
        if !outcomes.is_null() {
            let out = slice_mut(outcomes, n, "outcomes")?;
            for (o, &x) in out.iter_mut().zip(step.outcomes) {
                *o = x as u8;
            }
        }
        if !category.is_null() {
            *category = step.category.map_or(-1, |k| k as i64);
        }
        Ok(())
    })
}

/// Current time step, or 0 for a null handle.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rf_simulation_t(sim: *const RfSimulation) -> u64 {
    sim.as_ref().map_or(0, |s| s.0.t())
}

/// Cumulative success counts; `counts` holds `n` values.
///
/// # Safety
/// Pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn rf_simulation_counts(sim: *const RfSimulation, counts: *mut u64) -> i32 {
    guard(|| {
        let s = &handle(sim, "sim")?.0;
        slice_mut(counts, s.n(), "counts")?.copy_from_slice(s.counts());
        Ok(())
    })
}

/// Success probabilities for the next step; `probs` holds `n` doubles.
///
/// # Safety
/// Pointers must be valid for the sizes above.
#[no_mangle]
pub unsafe extern "C" fn rf_simulation_probabilities(
    sim: *const RfSimulation,
    probs: *mut f64,
) -> i32 {
    guard(|| {
        let s = &handle(sim, "sim")?.0;
        slice_mut(probs, s.n(), "probs")?.copy_from_slice(&s.probabilities());
        Ok(())
    })
}
