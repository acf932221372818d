//! C interface to the rotation toolkit.
//!
//! Objects cross the boundary as opaque handles created by `tfr_*_new`-style
//! functions and released with the matching `tfr_*_free`. Every fallible call
//! returns a [`TfrStatus`]; the message of the last failure on the calling
//! thread is available from [`tfr_last_error`]. Strings returned by the
//! library are owned by the caller and released with [`tfr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use toffrot::builder::{build, Style};
use toffrot::circuit::{executed_census, Basis, Circuit, InitialState};
use toffrot::harness::{self, ExperimentConfig, Report};
use toffrot::planner::RotationPlan;
use toffrot::sim::{run_shots, success_counts, NoiseConvention, NoiseSpec};
use toffrot::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Size = 3,
    Parse = 4,
    InsufficientData = 5,
    Io = 6,
    Internal = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfrStyle {
    Simplified = 0,
    Naive = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfrConvention {
    MixedState = 0,
    UniformPauli = 1,
}

/// Target preparation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfrState {
    Zero = 0,
    One = 1,
    Plus = 2,
    PlusI = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfrBasis {
    X = 0,
    Y = 1,
    Z = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TfrPlanInfo {
    pub n: u32,
    pub k: u64,
    pub theta: f64,
    pub theta_star: f64,
    pub angle_error: f64,
    pub p_success: f64,
}

/// Executed gate counts; X-basis readouts count as H.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TfrCensus {
    pub qubits: usize,
    pub h: usize,
    pub x: usize,
    pub s: usize,
    pub sdg: usize,
    pub z: usize,
    pub cnot: usize,
    pub toffoli: usize,
}

/// Heralded split of a shot run: index 0/1 of the target arrays is the
/// target readout.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TfrShotSummary {
    pub shots: u64,
    pub success: u64,
    pub success_target: [u64; 2],
    pub failure_target: [u64; 2],
}

/// One result row; absent fidelities are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TfrReportRow {
    pub n: u32,
    pub delta: f64,
    pub prob: f64,
    pub agf_t: f64,
    pub pf_t: f64,
    pub agf_z: f64,
    pub pf_z: f64,
}

pub struct TfrPlan(RotationPlan);
pub struct TfrCircuit(Circuit);
pub struct TfrReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TfrStatus {
    match e {
        Error::Size(..) => TfrStatus::Size,
        Error::Shape(_) | Error::Validation(_) | Error::Domain(_) | Error::Schema(_) => TfrStatus::InvalidArgument,
        Error::InsufficientData(_) => TfrStatus::InsufficientData,
        Error::Parse { .. } => TfrStatus::Parse,
        Error::Io(_) => TfrStatus::Io,
        Error::Internal(_) => TfrStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (TfrStatus, String)>) -> TfrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TfrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside toffrot");
            TfrStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, (TfrStatus, String)>;
}

impl<T> OrStatus<T> for toffrot::Result<T> {
    fn or_status(self) -> Result<T, (TfrStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (TfrStatus, String) {
    (TfrStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (TfrStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TfrStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (TfrStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tfr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Version and build description; static storage.
#[no_mangle]
pub extern "C" fn tfr_version() -> *const c_char {
    static VERSION: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    VERSION.get_or_init(|| CString::new(harness::stamp()).unwrap()).as_ptr()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tfr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Plan for `n` outer ancillas; `reduce` strips trailing zero bits of `k`.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn tfr_plan_from_n(theta: f64, n: u32, reduce: bool, out: *mut *mut TfrPlan) -> TfrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, TfrPlan(RotationPlan::from_n(theta, n, reduce).or_status()?));
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn tfr_plan_from_epsilon(theta: f64, epsilon: f64, out: *mut *mut TfrPlan) -> TfrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, TfrPlan(RotationPlan::from_epsilon(theta, epsilon).or_status()?));
        Ok(())
    })
}

/// # Safety
/// `plan` is NULL or a live handle; `info` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfr_plan_info(plan: *const TfrPlan, info: *mut TfrPlanInfo) -> TfrStatus {
    guard(|| {
        let p = &as_ref(plan, "plan")?.0;
        let info = info.as_mut().ok_or_else(|| null("info"))?;
        *info = TfrPlanInfo {
            n: p.n,
            k: p.k,
            theta: p.theta,
            theta_star: p.theta_star,
            angle_error: p.angle_error(),
            p_success: p.p_success,
        };
        Ok(())
    })
}

/// # Safety
/// `plan` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfr_plan_free(plan: *mut TfrPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// # Safety
/// `plan` is a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfr_circuit_build(
    plan: *const TfrPlan,
    style: TfrStyle,
    out: *mut *mut TfrCircuit,
) -> TfrStatus {
    guard(|| {
        let p = &as_ref(plan, "plan")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let style = match style {
            TfrStyle::Simplified => Style::Simplified,
            TfrStyle::Naive => Style::Naive,
        };
        put(out, TfrCircuit(build(p, style).or_status()?));
        Ok(())
    })
}

/// Apply every rewrite pass; the input handle is left unchanged.
///
/// # Safety
/// `circuit` is a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfr_circuit_simplify(circuit: *const TfrCircuit, out: *mut *mut TfrCircuit) -> TfrStatus {
    guard(|| {
        let c = &as_ref(circuit, "circuit")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, TfrCircuit(toffrot::simplify::simplify(c)));
        Ok(())
    })
}

/// Choose the target's preparation and readout basis.
///
/// # Safety
/// `circuit` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfr_circuit_set_target(circuit: *mut TfrCircuit, state: TfrState, basis: TfrBasis) -> TfrStatus {
    guard(|| {
        let c = &mut circuit.as_mut().ok_or_else(|| null("circuit"))?.0;
        c.set_target_state(match state {
            TfrState::Zero => InitialState::Zero,
            TfrState::One => InitialState::One,
            TfrState::Plus => InitialState::Plus,
            TfrState::PlusI => InitialState::PlusI,
        });
        c.set_target_basis(match basis {
            TfrBasis::X => Basis::X,
            TfrBasis::Y => Basis::Y,
            TfrBasis::Z => Basis::Z,
        });
        Ok(())
    })
}

/// # Safety
/// `circuit` is a live handle; `census` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfr_circuit_census(circuit: *const TfrCircuit, census: *mut TfrCensus) -> TfrStatus {
    guard(|| {
        let c = &as_ref(circuit, "circuit")?.0;
        let out = census.as_mut().ok_or_else(|| null("census"))?;
        let e = executed_census(c);
        *out = TfrCensus {
            qubits: c.num_qubits(),
            h: e.h,
            x: e.x,
            s: e.s,
            sdg: e.sdg,
            z: e.z,
            cnot: e.cnot,
            toffoli: e.toffoli,
        };
        Ok(())
    })
}

/// OpenQASM 3 text, or NULL on failure. Free with [`tfr_string_free`].
///
/// # Safety
/// `circuit` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfr_circuit_to_qasm(circuit: *const TfrCircuit) -> *mut c_char {
    let mut text = None;
    let status = guard(|| {
        text = Some(toffrot::qasm::emit_qasm(&as_ref(circuit, "circuit")?.0));
        Ok(())
    });
    match (status, text) {
        (TfrStatus::Ok, Some(t)) => into_c_string(t),
        _ => ptr::null_mut(),
    }
}

/// # Safety
/// `text` is a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfr_circuit_from_qasm(text: *const c_char, out: *mut *mut TfrCircuit) -> TfrStatus {
    guard(|| {
        let text = read_str(text, "text")?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, TfrCircuit(toffrot::qasm::parse_qasm(text).or_status()?));
        Ok(())
    })
}

/// # Safety
/// `circuit` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfr_circuit_free(circuit: *mut TfrCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Sample `shots` noisy runs and split them by the herald.
///
/// # Safety
/// `circuit` is a live handle; `summary` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfr_simulate(
    circuit: *const TfrCircuit,
    delta: f64,
    convention: TfrConvention,
    shots: u64,
    seed: u64,
    summary: *mut TfrShotSummary,
) -> TfrStatus {
    guard(|| {
        let c = &as_ref(circuit, "circuit")?.0;
        let out = summary.as_mut().ok_or_else(|| null("summary"))?;
        let convention = match convention {
            TfrConvention::MixedState => NoiseConvention::MixedState,
            TfrConvention::UniformPauli => NoiseConvention::UniformPauli,
        };
        let noise = NoiseSpec::new(delta, convention);
        noise.validate().or_status()?;
        let counts = run_shots(c, &noise, shots, seed).or_status()?;
        let s = success_counts(&counts, c).or_status()?;
        *out = TfrShotSummary {
            shots: s.shots,
            success: s.success,
            success_target: s.success_target,
            failure_target: s.failure_target,
        };
        Ok(())
    })
}

/// Run an experiment described by a JSON config (same fields as the CLI).
///
/// # Safety
/// `config_json` is a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfr_experiment_run(config_json: *const c_char, out: *mut *mut TfrReport) -> TfrStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json(read_str(config_json, "config_json")?).or_status()?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, TfrReport(harness::run_experiment(&cfg).or_status()?));
        Ok(())
    })
}

/// # Safety
/// `report` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfr_report_len(report: *const TfrReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `report` is a live handle; `row` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tfr_report_row(report: *const TfrReport, index: usize, row: *mut TfrReportRow) -> TfrStatus {
    guard(|| {
        let r = &as_ref(report, "report")?.0;
        let out = row.as_mut().ok_or_else(|| null("row"))?;
        let x = r.rows.get(index).ok_or_else(|| {
            (TfrStatus::InvalidArgument, format!("row {index} out of range ({} rows)", r.rows.len()))
        })?;
        let v = |o: Option<f64>| o.unwrap_or(f64::NAN);
        *out = TfrReportRow {
            n: x.n,
            delta: x.delta,
            prob: x.prob,
            agf_t: v(x.agf_t),
            pf_t: v(x.pf_t),
            agf_z: v(x.agf_z),
            pf_z: v(x.pf_z),
        };
        Ok(())
    })
}

/// Report as CSV with its header lines, or NULL on failure. Free with
/// [`tfr_string_free`].
///
/// # Safety
/// `report` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tfr_report_to_csv(report: *const TfrReport) -> *mut c_char {
    let mut text = None;
    let status = guard(|| {
        let r = &as_ref(report, "report")?.0;
        let mut buf = Vec::new();
        harness::write_report(r, &mut buf).or_status()?;
        text = Some(String::from_utf8(buf).map_err(|e| (TfrStatus::Internal, e.to_string()))?);
        Ok(())
    });
    match (status, text) {
        (TfrStatus::Ok, Some(t)) => into_c_string(t),
        _ => ptr::null_mut(),
    }
}

/// # Safety
/// `report` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tfr_report_free(report: *mut TfrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
