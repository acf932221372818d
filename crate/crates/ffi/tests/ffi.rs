use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use toffrot_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tfr_last_error()) }.to_string_lossy().into_owned()
}

fn plan(n: u32) -> *mut TfrPlan {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { tfr_plan_from_n(std::f64::consts::FRAC_PI_4, n, true, &mut p) }, TfrStatus::Ok);
    p
}

#[test]
fn plan_info_matches_core() {
    let p = plan(5);
    let mut info = TfrPlanInfo::default();
    unsafe {
        assert_eq!(tfr_plan_info(p, &mut info), TfrStatus::Ok);
        tfr_plan_free(p);
    }
    let core = toffrot::planner::RotationPlan::from_n(std::f64::consts::FRAC_PI_4, 5, true).unwrap();
    assert_eq!((info.n, info.k), (core.n, core.k));
    assert_eq!(info.theta_star.to_bits(), core.theta_star.to_bits());
    assert_eq!(info.p_success.to_bits(), core.p_success.to_bits());
    assert!((info.angle_error - (info.theta_star - info.theta).abs()).abs() < 1e-15);
}

#[test]
fn errors_set_status_and_message() {
    let mut p = ptr::null_mut();
    let s = unsafe { tfr_plan_from_epsilon(0.3, -1.0, &mut p) };
    assert_ne!(s, TfrStatus::Ok);
    assert!(p.is_null());
    assert!(!last_error().is_empty());

    let mut info = TfrPlanInfo::default();
    assert_eq!(unsafe { tfr_plan_info(ptr::null(), &mut info) }, TfrStatus::NullPointer);
    assert!(last_error().contains("plan"));

    let bad = CString::new("OPENQASM 3.0;\nqubit[1] q;\nfoo q[0];\n").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { tfr_circuit_from_qasm(bad.as_ptr(), &mut c) }, TfrStatus::Parse);
    assert!(last_error().contains('3'), "{}", last_error());
}

#[test]
fn qasm_round_trip_through_handles() {
    let p = plan(4);
    let mut c = ptr::null_mut();
    let mut back = ptr::null_mut();
    let (mut a, mut b) = (TfrCensus::default(), TfrCensus::default());
    unsafe {
        assert_eq!(tfr_circuit_build(p, TfrStyle::Simplified, &mut c), TfrStatus::Ok);
        let text = tfr_circuit_to_qasm(c);
        assert!(!text.is_null());
        assert!(CStr::from_ptr(text).to_str().unwrap().starts_with("OPENQASM 3.0;"));
        assert_eq!(tfr_circuit_from_qasm(text, &mut back), TfrStatus::Ok);
        tfr_string_free(text);
        assert_eq!(tfr_circuit_census(c, &mut a), TfrStatus::Ok);
        assert_eq!(tfr_circuit_census(back, &mut b), TfrStatus::Ok);
        tfr_circuit_free(back);
        tfr_circuit_free(c);
        tfr_plan_free(p);
    }
    assert_eq!(a, b);
    assert_eq!(a.toffoli, 6);
    assert_eq!(a.qubits, 7);
}

#[test]
fn noiseless_simulation_matches_plan() {
    let p = plan(2);
    let mut c = ptr::null_mut();
    let mut info = TfrPlanInfo::default();
    let mut s = TfrShotSummary::default();
    unsafe {
        tfr_plan_info(p, &mut info);
        tfr_circuit_build(p, TfrStyle::Simplified, &mut c);
        assert_eq!(tfr_circuit_set_target(c, TfrState::Zero, TfrBasis::Z), TfrStatus::Ok);
        assert_eq!(tfr_simulate(c, 0.0, TfrConvention::MixedState, 20_000, 7, &mut s), TfrStatus::Ok);
        tfr_circuit_free(c);
        tfr_plan_free(p);
    }
    assert_eq!(s.shots, 20_000);
    assert_eq!(s.success, s.success_target[0] + s.success_target[1]);
    // |0> is invariant under both branches.
    assert_eq!(s.success_target[1] + s.failure_target[1], 0);
    let prob = s.success as f64 / s.shots as f64;
    assert!((prob - info.p_success).abs() < 0.02, "{prob} vs {}", info.p_success);
}

#[test]
fn bad_noise_rate_is_rejected() {
    let p = plan(2);
    let mut c = ptr::null_mut();
    let mut s = TfrShotSummary::default();
    unsafe {
        tfr_circuit_build(p, TfrStyle::Naive, &mut c);
        assert_eq!(tfr_simulate(c, 1.5, TfrConvention::UniformPauli, 10, 1, &mut s), TfrStatus::InvalidArgument);
        tfr_circuit_free(c);
        tfr_plan_free(p);
    }
}

#[test]
fn experiment_report_rows_and_csv() {
    let cfg = CString::new(r#"{"n": [2], "delta": [0.0], "shots": 2000, "seed": 5}"#).unwrap();
    let mut r = ptr::null_mut();
    let mut row = TfrReportRow::default();
    unsafe {
        assert_eq!(tfr_experiment_run(cfg.as_ptr(), &mut r), TfrStatus::Ok, "{}", last_error());
        assert_eq!(tfr_report_len(r), 1);
        assert_eq!(tfr_report_row(r, 0, &mut row), TfrStatus::Ok);
        assert_eq!(tfr_report_row(r, 1, &mut row.clone()), TfrStatus::InvalidArgument);
        let csv = tfr_report_to_csv(r);
        let text = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        tfr_string_free(csv);
        tfr_report_free(r);
        assert!(text.starts_with("# seed=5\n"));
    }
    let cfg = toffrot::harness::ExperimentConfig::from_json(cfg.to_str().unwrap()).unwrap();
    let core = toffrot::harness::run_experiment(&cfg).unwrap().rows[0];
    assert_eq!(row.n, 2);
    assert_eq!(row.prob.to_bits(), core.prob.to_bits());
    assert_eq!(row.pf_t.to_bits(), core.pf_t.unwrap().to_bits());
    assert_eq!(row.agf_z.to_bits(), core.agf_z.unwrap().to_bits());
}

#[test]
fn unknown_config_field_is_reported() {
    let cfg = CString::new(r#"{"n": [2], "bogus": 1}"#).unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { tfr_experiment_run(cfg.as_ptr(), &mut r) }, TfrStatus::InvalidArgument);
    assert!(r.is_null());
    assert!(last_error().contains("bogus"), "{}", last_error());
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        tfr_plan_free(ptr::null_mut());
        tfr_circuit_free(ptr::null_mut());
        tfr_report_free(ptr::null_mut());
        tfr_string_free(ptr::null_mut());
        assert_eq!(tfr_report_len(ptr::null()), 0);
        assert!(tfr_circuit_to_qasm(ptr::null()).is_null());
    }
    let v = unsafe { CStr::from_ptr(tfr_version()) }.to_str().unwrap();
    assert!(v.starts_with("toffrot "));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/toffrot.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["tfr_plan_from_n", "tfr_simulate", "tfr_report_to_csv", "tfr_last_error"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99"]).arg(&header).output() else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
