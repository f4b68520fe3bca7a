//! C ABI over the `memchua` toolkit.
//!
//! Circuits and trajectories cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every entry point
//! returns a [`MemchuaStatus`]; on failure a description is available from
//! [`memchua_last_error`] on the same thread until the next failing call.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use memchua::analysis::{
    classify, largest_lyapunov, ClassifyConfig, LyapunovConfig, ScrollSide, TrajectoryLabel,
};
use memchua::circuit::{CircuitParams, EquilibriumLabel, StateVector};
use memchua::design::{design_circuit, DesignSpec};
use memchua::device::{DevicePoly, DeviceState};
use memchua::integrate::{integrate, IntegrationConfig, Method, SoaPolicy, Trajectory};
use memchua::Error;

/// Status codes; the nonzero values mirror the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemchuaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    FitFailed = 3,
    DesignFailed = 4,
    Runtime = 5,
    BufferTooSmall = 6,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemchuaLabel {
    FixedPoint = 0,
    Periodic = 1,
    SingleScroll = 2,
    DoubleScroll = 3,
    Diverged = 4,
    Inconclusive = 5,
}

/// Opaque circuit handle.
pub struct MemchuaCircuit {
    params: CircuitParams,
}

/// Opaque trajectory handle.
pub struct MemchuaTrajectory {
    traj: Trajectory,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MemchuaDesignSpec {
    pub v_eq: f64,
    pub c1: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Component values in SI units; `r` and `r_n` are resistances.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MemchuaComponents {
    pub c1: f64,
    pub c2: f64,
    pub l: f64,
    pub r: f64,
    pub r_n: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MemchuaEquilibrium {
    /// 0 for the origin, +1 / -1 for the outer points.
    pub label: i32,
    pub v1: f64,
    pub v2: f64,
    pub i_l: f64,
    pub eig_re: [f64; 3],
    pub eig_im: [f64; 3],
    pub stable: bool,
    pub in_window: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MemchuaIntegration {
    /// Dormand-Prince with `abs_tol`/`rel_tol` when true, RK4 with `dt` otherwise.
    pub adaptive: bool,
    pub dt: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_end: f64,
    pub t_transient: f64,
    pub record_stride: usize,
    /// Stop at the first excursion of `v1` outside the device window.
    pub abort_on_soa: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MemchuaClass {
    pub label: MemchuaLabel,
    /// -1 negative scroll only, +1 positive only, 2 both, 0 none.
    pub scroll_side: i32,
    /// `NaN` when no exponent was supplied.
    pub lambda1_dimensionless: f64,
    pub n_extrema_clusters: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MemchuaStatus {
    match e {
        Error::Underdetermined { .. } | Error::Singular { .. } => MemchuaStatus::FitFailed,
        Error::InfeasibleG { .. } | Error::SafeWindow { .. } => MemchuaStatus::DesignFailed,
        Error::StepUnderflow { .. } | Error::Diverged { .. } | Error::TooShort { .. } | Error::Io(_) => {
            MemchuaStatus::Runtime
        }
        _ => MemchuaStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (MemchuaStatus, String)>) -> MemchuaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MemchuaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MemchuaStatus::Panic
        }
    }
}

fn lib(e: Error) -> (MemchuaStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (MemchuaStatus, String)> {
    p.as_ref().ok_or_else(|| (MemchuaStatus::NullPointer, format!("{what} is null")))
}

unsafe fn coeffs_from(p: *const f64) -> Result<[f64; 5], (MemchuaStatus, String)> {
    if p.is_null() {
        return Err((MemchuaStatus::NullPointer, "coefficient pointer is null".into()));
    }
    let mut c = [0.0; 5];
    c.copy_from_slice(std::slice::from_raw_parts(p, 5));
    Ok(c)
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn memchua_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn memchua_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn memchua_design_spec_default() -> MemchuaDesignSpec {
    let d = DesignSpec::default();
    MemchuaDesignSpec { v_eq: d.v_eq, c1: d.c1, alpha: d.alpha, beta: d.beta }
}

#[no_mangle]
pub extern "C" fn memchua_integration_default() -> MemchuaIntegration {
    MemchuaIntegration {
        adaptive: false,
        dt: 1e-6,
        abs_tol: 1e-9,
        rel_tol: 1e-8,
        t_end: 0.5,
        t_transient: 0.1,
        record_stride: 1,
        abort_on_soa: false,
    }
}

/// Reference device coefficients `p1..p5` (A/V^k) written to `out[0..5]`.
#[no_mangle]
pub unsafe extern "C" fn memchua_reference_coefficients(out: *mut f64) -> MemchuaStatus {
    guard(|| {
        if out.is_null() {
            return Err((MemchuaStatus::NullPointer, "out is null".into()));
        }
        std::slice::from_raw_parts_mut(out, 5).copy_from_slice(&DevicePoly::reference().coeffs);
        Ok(())
    })
}

/// Designs a circuit for a device state given by five coefficients and its
/// SET/STOP voltages. Writes a new handle to `*out`.
///
/// A design whose post-checks fail still yields a handle but returns
/// `DESIGN_FAILED`; the caller must free it.
#[no_mangle]
pub unsafe extern "C" fn memchua_circuit_design(
    coeffs: *const f64,
    v_set_mag: f64,
    v_stop: f64,
    spec: *const MemchuaDesignSpec,
    out: *mut *mut MemchuaCircuit,
) -> MemchuaStatus {
    guard(|| {
        if out.is_null() {
            return Err((MemchuaStatus::NullPointer, "out is null".into()));
        }
        *out = ptr::null_mut();
        let s = deref(spec, "spec")?;
        let c = coeffs_from(coeffs)?;
        let poly = DevicePoly::new(c, -v_set_mag, v_stop).map_err(lib)?;
        let state = DeviceState::new(poly.read_resistance(), v_set_mag, v_stop, c).map_err(lib)?;
        let ds = DesignSpec { v_eq: s.v_eq, c1: s.c1, alpha: s.alpha, beta: s.beta };
        let rep = design_circuit(&state, &ds).map_err(lib)?;
        *out = Box::into_raw(Box::new(MemchuaCircuit { params: rep.params }));
        let failed: Vec<_> = rep.failed().map(|c| c.name).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err((MemchuaStatus::DesignFailed, format!("design check failed: {}", failed.join(", "))))
        }
    })
}

/// Builds a circuit from explicit components and a device window `[v_min, v_max]`.
#[no_mangle]
pub unsafe extern "C" fn memchua_circuit_from_components(
    coeffs: *const f64,
    v_min: f64,
    v_max: f64,
    components: *const MemchuaComponents,
    out: *mut *mut MemchuaCircuit,
) -> MemchuaStatus {
    guard(|| {
        if out.is_null() {
            return Err((MemchuaStatus::NullPointer, "out is null".into()));
        }
        *out = ptr::null_mut();
        let k = deref(components, "components")?;
        let poly = DevicePoly::new(coeffs_from(coeffs)?, v_min, v_max).map_err(lib)?;
        let params = CircuitParams::new(k.c1, k.c2, k.l, 1.0 / k.r, 1.0 / k.r_n, poly).map_err(lib)?;
        *out = Box::into_raw(Box::new(MemchuaCircuit { params }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn memchua_circuit_components(
    circuit: *const MemchuaCircuit,
    out: *mut MemchuaComponents,
) -> MemchuaStatus {
    guard(|| {
        let p = &deref(circuit, "circuit")?.params;
        if out.is_null() {
            return Err((MemchuaStatus::NullPointer, "out is null".into()));
        }
        *out = MemchuaComponents { c1: p.c1, c2: p.c2, l: p.l, r: 1.0 / p.g, r_n: 1.0 / p.g_n };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn memchua_circuit_free(circuit: *mut MemchuaCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Writes up to `capacity` equilibria to `out` and their total count to `*count`.
/// Returns `BUFFER_TOO_SMALL` when `capacity < *count`.
#[no_mangle]
pub unsafe extern "C" fn memchua_circuit_equilibria(
    circuit: *const MemchuaCircuit,
    out: *mut MemchuaEquilibrium,
    capacity: usize,
    count: *mut usize,
) -> MemchuaStatus {
    guard(|| {
        let p = &deref(circuit, "circuit")?.params;
        if count.is_null() || (out.is_null() && capacity > 0) {
            return Err((MemchuaStatus::NullPointer, "output pointer is null".into()));
        }
        let eq = p.find_equilibria();
        *count = eq.len();
        for (k, e) in eq.iter().take(capacity).enumerate() {
            let label = match e.label {
                EquilibriumLabel::Origin => 0,
                EquilibriumLabel::Positive => 1,
                EquilibriumLabel::Negative => -1,
            };
            *out.add(k) = MemchuaEquilibrium {
                label,
                v1: e.state.v1,
                v2: e.state.v2,
                i_l: e.state.i_l,
                eig_re: e.eigenvalues.map(|z| z.re),
                eig_im: e.eigenvalues.map(|z| z.im),
                stable: e.stable,
                in_window: e.in_window,
            };
        }
        if capacity < eq.len() {
            return Err((
                MemchuaStatus::BufferTooSmall,
                format!("{} equilibria, capacity {capacity}", eq.len()),
            ));
        }
        Ok(())
    })
}

fn integration_config(c: &MemchuaIntegration) -> IntegrationConfig {
    IntegrationConfig {
        method: if c.adaptive {
            Method::Adaptive { abs_tol: c.abs_tol, rel_tol: c.rel_tol }
        } else {
            Method::Fixed { dt: c.dt }
        },
        t_end: c.t_end,
        t_transient: c.t_transient,
        record_stride: c.record_stride,
        soa_policy: if c.abort_on_soa { SoaPolicy::Abort } else { SoaPolicy::Warn },
    }
}

/// Integrates from `init[0..3]` = `(v1, v2, iL)`. A trajectory that diverged
/// or was aborted is still returned through `*out`, with status `RUNTIME`.
#[no_mangle]
pub unsafe extern "C" fn memchua_simulate(
    circuit: *const MemchuaCircuit,
    init: *const f64,
    config: *const MemchuaIntegration,
    out: *mut *mut MemchuaTrajectory,
) -> MemchuaStatus {
    guard(|| {
        if out.is_null() || init.is_null() {
            return Err((MemchuaStatus::NullPointer, "output or init pointer is null".into()));
        }
        *out = ptr::null_mut();
        let p = &deref(circuit, "circuit")?.params;
        let cfg = integration_config(deref(config, "config")?);
        let s = std::slice::from_raw_parts(init, 3);
        let traj = integrate(p, StateVector::new(s[0], s[1], s[2]), &cfg).map_err(lib)?;
        let diverged = traj.diverged();
        let aborted = cfg.soa_policy == SoaPolicy::Abort && traj.soa_events().next().is_some();
        *out = Box::into_raw(Box::new(MemchuaTrajectory { traj }));
        if diverged {
            Err((MemchuaStatus::Runtime, "trajectory diverged".into()))
        } else if aborted {
            Err((MemchuaStatus::Runtime, "v1 left the safe operating window".into()))
        } else {
            Ok(())
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn memchua_trajectory_len(traj: *const MemchuaTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.len())
}

#[no_mangle]
pub unsafe extern "C" fn memchua_trajectory_soa_events(traj: *const MemchuaTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.soa_events().count())
}

#[no_mangle]
pub unsafe extern "C" fn memchua_trajectory_diverged(traj: *const MemchuaTrajectory) -> bool {
    traj.as_ref().is_some_and(|t| t.traj.diverged())
}

/// Copies the recorded samples: `times[k]` and `states[3k..3k+3]`.
/// Either output may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn memchua_trajectory_copy(
    traj: *const MemchuaTrajectory,
    times: *mut f64,
    states: *mut f64,
    capacity: usize,
) -> MemchuaStatus {
    guard(|| {
        let t = &deref(traj, "trajectory")?.traj;
        if capacity < t.len() {
            return Err((MemchuaStatus::BufferTooSmall, format!("{} samples, capacity {capacity}", t.len())));
        }
        if !times.is_null() {
            std::slice::from_raw_parts_mut(times, t.len()).copy_from_slice(&t.times);
        }
        if !states.is_null() {
            let dst = std::slice::from_raw_parts_mut(states, 3 * t.len());
            for (chunk, s) in dst.chunks_exact_mut(3).zip(&t.states) {
                chunk.copy_from_slice(&s.to_array());
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn memchua_trajectory_free(traj: *mut MemchuaTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Largest Lyapunov exponent (1/s) from `init`, RK4 with step `dt`.
#[no_mangle]
pub unsafe extern "C" fn memchua_largest_lyapunov(
    circuit: *const MemchuaCircuit,
    init: *const f64,
    dt: f64,
    t_end: f64,
    t_transient: f64,
    out_per_second: *mut f64,
) -> MemchuaStatus {
    guard(|| {
        if init.is_null() || out_per_second.is_null() {
            return Err((MemchuaStatus::NullPointer, "init or output pointer is null".into()));
        }
        let p = &deref(circuit, "circuit")?.params;
        let s = std::slice::from_raw_parts(init, 3);
        let cfg = LyapunovConfig { dt, t_end, t_transient, ..LyapunovConfig::default() };
        let est = largest_lyapunov(p, StateVector::new(s[0], s[1], s[2]), &cfg).map_err(lib)?;
        *out_per_second = est.per_second;
        Ok(())
    })
}

/// Classifies a trajectory with default thresholds. Pass `NaN` for
/// `lambda1_per_second` to classify on extrema alone.
#[no_mangle]
pub unsafe extern "C" fn memchua_classify(
    circuit: *const MemchuaCircuit,
    traj: *const MemchuaTrajectory,
    lambda1_per_second: f64,
    out: *mut MemchuaClass,
) -> MemchuaStatus {
    guard(|| {
        let p = &deref(circuit, "circuit")?.params;
        let t = &deref(traj, "trajectory")?.traj;
        if out.is_null() {
            return Err((MemchuaStatus::NullPointer, "out is null".into()));
        }
        let lambda = (!lambda1_per_second.is_nan()).then_some(lambda1_per_second);
        let c = classify(t, &p.find_equilibria(), p.time_scale(), lambda, &ClassifyConfig::default());
        *out = MemchuaClass {
            label: match c.label {
                TrajectoryLabel::FixedPoint => MemchuaLabel::FixedPoint,
                TrajectoryLabel::Periodic => MemchuaLabel::Periodic,
                TrajectoryLabel::SingleScroll => MemchuaLabel::SingleScroll,
                TrajectoryLabel::DoubleScroll => MemchuaLabel::DoubleScroll,
                TrajectoryLabel::Diverged => MemchuaLabel::Diverged,
                TrajectoryLabel::Inconclusive => MemchuaLabel::Inconclusive,
            },
            scroll_side: match c.scroll_side {
                ScrollSide::Negative => -1,
                ScrollSide::Positive => 1,
                ScrollSide::Both => 2,
                ScrollSide::None => 0,
            },
            lambda1_dimensionless: c.lambda1_dimensionless.unwrap_or(f64::NAN),
            n_extrema_clusters: c.n_extrema_clusters,
        };
        Ok(())
    })
}
