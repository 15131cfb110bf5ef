//! C ABI over `qcollide`.
//!
//! Matrices cross the boundary as interleaved `(re, im)` doubles in
//! row-major order, so a `d x d` matrix is `2 * d * d` doubles. Objects are
//! opaque handles created by `qc_*_new`/`qc_run_*` functions and released
//! with the matching `qc_*_free`. Every fallible call returns a
//! [`QcStatus`]; on failure [`qc_last_error_message`] describes the problem
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use qcollide::channels::CollisionSpec;
use qcollide::me::{integrate_me, IntegratorConfig, RhsForm};
use qcollide::periodic::{run_correlated_bath, run_periodic, uniform_fixed_m_bath};
use qcollide::qmat::{c, partial_swap_unitary, trace_distance, ComplexMatrix};
use qcollide::stochastic::{ensemble_average, SamplingMode};
use qcollide::witness::blp_witness;
use qcollide::{DensityMatrix, Error, StateSeries, UnitaryOp};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidState = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcRhsForm {
    Map = 0,
    Kraus = 1,
}

/// Opaque collision model.
pub struct QcSpec(CollisionSpec);

/// Opaque time series of density matrices.
pub struct QcSeries(StateSeries);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(err: &Error) -> QcStatus {
    match err {
        Error::Dimension(_) => QcStatus::DimensionMismatch,
        Error::InvalidParameter { .. } | Error::Config { .. } | Error::Io(_) => {
            QcStatus::InvalidArgument
        }
        _ => QcStatus::InvalidState,
    }
}

struct Failure(QcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QcStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, records any error and converts panics into `QC_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QcStatus::Panic
        }
    }
}

unsafe fn doubles<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn read_matrix(p: *const f64, d: usize, what: &str) -> Result<ComplexMatrix, Failure> {
    let v = doubles(p, 2 * d * d, what)?;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        c(v[k], v[k + 1])
    }))
}

unsafe fn read_state(p: *const f64, d: usize, what: &str) -> Result<DensityMatrix, Failure> {
    Ok(DensityMatrix::new(read_matrix(p, d, what)?)?)
}

unsafe fn spec_ref<'a>(spec: *const QcSpec) -> Result<&'a CollisionSpec, Failure> {
    spec.as_ref().map(|s| &s.0).ok_or_else(|| null("spec"))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message describing the last failed call on this thread. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a collision model from an explicit unitary on `d_s * d_a`
/// dimensions and an ancilla state on `d_a`.
///
/// # Safety
/// `unitary` must point to `2 * (d_s*d_a)^2` doubles, `eta` to `2 * d_a^2`
/// doubles, and `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qc_spec_new(
    d_s: usize,
    d_a: usize,
    unitary: *const f64,
    eta: *const f64,
    gamma: f64,
    out: *mut *mut QcSpec,
) -> QcStatus {
    guard(|| {
        let u = UnitaryOp::new(read_matrix(unitary, d_s * d_a, "unitary")?)?;
        let eta = read_state(eta, d_a, "eta")?;
        emit(out, QcSpec(CollisionSpec::new(d_s, d_a, u, eta, gamma)?))
    })
}

/// Partial-swap collision `cos(theta) I + i sin(theta) SWAP` between two
/// `d`-level systems, ancilla in basis state `eta_index`.
///
/// # Safety
/// `out` must point to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qc_spec_new_partial_swap(
    d: usize,
    theta: f64,
    eta_index: usize,
    gamma: f64,
    out: *mut *mut QcSpec,
) -> QcStatus {
    guard(|| {
        let u = partial_swap_unitary(theta, d)?;
        let eta = DensityMatrix::basis(d, eta_index)?;
        emit(out, QcSpec(CollisionSpec::new(d, d, u, eta, gamma)?))
    })
}

/// # Safety
/// `spec` must be null or a handle from `qc_spec_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qc_spec_free(spec: *mut QcSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// System dimension of a collision model, 0 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_spec_system_dim(spec: *const QcSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.0.d_s())
}

/// Integrates the master equation with fixed-step RK4.
///
/// # Safety
/// `rho0` must hold `2 * d_s^2` doubles, `times` `n_times` doubles, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_integrate_me(
    spec: *const QcSpec,
    rho0: *const f64,
    times: *const f64,
    n_times: usize,
    step: f64,
    rhs_form: QcRhsForm,
    out: *mut *mut QcSeries,
) -> QcStatus {
    guard(|| {
        let spec = spec_ref(spec)?;
        let rho0 = read_state(rho0, spec.d_s(), "rho0")?;
        let times = doubles(times, n_times, "times")?;
        let form = match rhs_form {
            QcRhsForm::Map => RhsForm::Map,
            QcRhsForm::Kraus => RhsForm::Kraus,
        };
        let cfg = IntegratorConfig::new(step, form)?;
        emit(out, QcSeries(integrate_me(spec, &rho0, times, &cfg)?))
    })
}

/// Monte Carlo average over `n_traj` stochastic trajectories. A negative
/// `fixed_n` samples Poisson collision times; otherwise exactly `fixed_n`
/// collisions occur before the last output time.
///
/// # Safety
/// As for [`qc_integrate_me`].
#[no_mangle]
pub unsafe extern "C" fn qc_ensemble_average(
    spec: *const QcSpec,
    rho0: *const f64,
    times: *const f64,
    n_times: usize,
    n_traj: usize,
    seed: u64,
    fixed_n: i64,
    out: *mut *mut QcSeries,
) -> QcStatus {
    guard(|| {
        let spec = spec_ref(spec)?;
        let rho0 = read_state(rho0, spec.d_s(), "rho0")?;
        let times = doubles(times, n_times, "times")?;
        let mode = if fixed_n < 0 {
            SamplingMode::Poisson
        } else {
            SamplingMode::FixedN(fixed_n as usize)
        };
        emit(
            out,
            QcSeries(ensemble_average(spec, &rho0, times, n_traj, seed, mode)?),
        )
    })
}

/// Periodic model with extended ancillas: `n_steps` steps of `delta_t`.
///
/// # Safety
/// `rho0` must hold `2 * d_s^2` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_run_periodic(
    spec: *const QcSpec,
    rho0: *const f64,
    delta_t: f64,
    n_steps: usize,
    out: *mut *mut QcSeries,
) -> QcStatus {
    guard(|| {
        let spec = spec_ref(spec)?;
        let rho0 = read_state(rho0, spec.d_s(), "rho0")?;
        emit(out, QcSeries(run_periodic(spec, &rho0, delta_t, n_steps)?))
    })
}

/// Periodic model whose bath is the uniform mixture of all placements of
/// exactly `m` colliding ancillas among `n_slots`.
///
/// # Safety
/// `rho0` must hold `2 * d_s^2` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_run_fixed_m_bath(
    spec: *const QcSpec,
    rho0: *const f64,
    n_slots: usize,
    m: usize,
    delta_t: f64,
    out: *mut *mut QcSeries,
) -> QcStatus {
    guard(|| {
        let spec = spec_ref(spec)?;
        let rho0 = read_state(rho0, spec.d_s(), "rho0")?;
        let bath = uniform_fixed_m_bath(n_slots, m, spec.eta().clone())?;
        emit(
            out,
            QcSeries(run_correlated_bath(spec, &bath, &rho0, delta_t)?),
        )
    })
}

/// Number of time points, 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_series_len(series: *const QcSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// Dimension of the states, 0 for a null handle or empty series.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_series_dim(series: *const QcSeries) -> usize {
    series
        .as_ref()
        .and_then(|s| s.0.states().first())
        .map_or(0, DensityMatrix::dim)
}

/// Copies the time grid into `out` (capacity `cap` doubles).
///
/// # Safety
/// `out` must be writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn qc_series_times(
    series: *const QcSeries,
    out: *mut f64,
    cap: usize,
) -> QcStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let times = s.0.times();
        if cap < times.len() {
            return Err(Failure(
                QcStatus::BufferTooSmall,
                format!("need {} doubles", times.len()),
            ));
        }
        ptr::copy_nonoverlapping(times.as_ptr(), out, times.len());
        Ok(())
    })
}

/// Copies state `index` as `2 * d^2` interleaved doubles into `out`.
///
/// # Safety
/// `out` must be writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn qc_series_state(
    series: *const QcSeries,
    index: usize,
    out: *mut f64,
    cap: usize,
) -> QcStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rho = s.0.states().get(index).ok_or_else(|| {
            Failure(
                QcStatus::InvalidArgument,
                format!("index {index} out of range 0..{}", s.0.len()),
            )
        })?;
        let d = rho.dim();
        if cap < 2 * d * d {
            return Err(Failure(
                QcStatus::BufferTooSmall,
                format!("need {} doubles", 2 * d * d),
            ));
        }
        let dst = slice::from_raw_parts_mut(out, 2 * d * d);
        for i in 0..d {
            for j in 0..d {
                let z = rho.mat()[(i, j)];
                dst[2 * (i * d + j)] = z.re;
                dst[2 * (i * d + j) + 1] = z.im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `series` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qc_series_free(series: *mut QcSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Trace distance between two `d x d` density matrices.
///
/// # Safety
/// `a` and `b` must hold `2 * d^2` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_trace_distance(
    a: *const f64,
    b: *const f64,
    d: usize,
    out: *mut f64,
) -> QcStatus {
    guard(|| {
        let a = read_state(a, d, "a")?;
        let b = read_state(b, d, "b")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = trace_distance(&a, &b)?;
        Ok(())
    })
}

/// Sum of positive increments of a trace-distance series.
///
/// # Safety
/// `times` and `distances` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_blp_witness(
    times: *const f64,
    distances: *const f64,
    n: usize,
    out: *mut f64,
) -> QcStatus {
    guard(|| {
        let t = doubles(times, n, "times")?;
        let d = doubles(distances, n, "distances")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = blp_witness(t, d)?.blp_value;
        Ok(())
    })
}
