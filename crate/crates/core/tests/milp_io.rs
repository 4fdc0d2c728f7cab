mod common;

use std::ffi::CString;
use std::path::PathBuf;
use std::process::Command;

use cfcuc::milp::{export_mps, ConstraintSense, ExternalBackend, HighsBackend, Model, SolveStatus, SolverBackend};
use cfcuc::sysmodel::Mode;
use common::{build, case, flat, tight, unit};

fn knapsack() -> Model {
    let mut m = Model::new("knap");
    let x = m.add_binary("x").unwrap();
    let y = m.add_binary("y").unwrap();
    let z = m.add_continuous("z", 0.0, 4.0).unwrap();
    m.add_constraint("cap", &[(x, 3.0), (y, 4.0), (z, 1.0)], ConstraintSense::Le, 6.0).unwrap();
    m.add_constraint("need", &[(x, 1.0), (y, 1.0)], ConstraintSense::Ge, 1.0).unwrap();
    m.set_objective(&[(x, -5.0), (y, -6.0), (z, -1.0)]).unwrap();
    m
}

/// Reads `text` back through the HiGHS C API and returns (columns, rows, objective).
fn highs_reimport(text: &str) -> (i64, i64, f64) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mps");
    std::fs::write(&path, text).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let h = highs_sys::Highs_create();
        let quiet = CString::new("output_flag").unwrap();
        highs_sys::Highs_setBoolOptionValue(h, quiet.as_ptr(), 0);
        let gap = CString::new("mip_rel_gap").unwrap();
        highs_sys::Highs_setDoubleOptionValue(h, gap.as_ptr(), 1e-9);
        assert_eq!(highs_sys::Highs_readModel(h, cpath.as_ptr()), 0, "HiGHS rejected the MPS file");
        let cols = highs_sys::Highs_getNumCol(h) as i64;
        let rows = highs_sys::Highs_getNumRow(h) as i64;
        highs_sys::Highs_run(h);
        let obj = highs_sys::Highs_getObjectiveValue(h);
        highs_sys::Highs_destroy(h);
        (cols, rows, obj)
    }
}

#[test]
fn knapsack_solves_in_process() {
    let sol = HighsBackend.solve(&knapsack(), &tight()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    // either item alone leaves room for z: -6 - 2 = -5 - 3 = -8
    assert!((sol.objective - -8.0).abs() < 1e-9, "{}", sol.objective);
}

#[test]
fn infeasible_model_is_reported() {
    let mut m = Model::new("bad");
    let x = m.add_continuous("x", 0.0, 1.0).unwrap();
    m.add_constraint("too_big", &[(x, 1.0)], ConstraintSense::Ge, 2.0).unwrap();
    m.set_objective(&[(x, 1.0)]).unwrap();
    assert_eq!(HighsBackend.solve(&m, &tight()).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn mps_reimports_with_the_same_optimum() {
    let m = knapsack();
    let (cols, rows, obj) = highs_reimport(&export_mps(&m));
    assert_eq!((cols, rows), (3, 2));
    assert!((obj - -8.0).abs() < 1e-9);

    let c = case(vec![unit("A", 2.0, 12.0), unit("B", 1.0, 12.0)], flat(3, 9.0), flat(3, 0.5), Mode::RocofCuc);
    let (model, _) = build(&c);
    let text = export_mps(&model);
    let (cols, rows, obj) = highs_reimport(&text);
    assert_eq!(cols as usize, model.num_vars());
    assert_eq!(rows as usize, model.num_constraints());
    let direct = HighsBackend.solve(&model, &tight()).unwrap();
    assert_eq!(direct.status, SolveStatus::Optimal);
    assert!((obj - direct.objective).abs() <= 1e-6 * direct.objective.abs().max(1.0), "{obj} vs {}", direct.objective);
}

#[test]
fn mps_export_is_byte_identical() {
    let c = case(vec![unit("A", 2.0, 10.0), unit("B", 1.0, 6.0)], flat(4, 9.0), flat(4, 0.0), Mode::RocofCuc);
    let a = export_mps(&build(&c).0);
    let b = export_mps(&build(&c).0);
    assert_eq!(a, b);
    assert!(a.starts_with("NAME"));
    assert!(a.trim_end().ends_with("ENDATA"));
}

#[test]
fn frozen_model_rejects_edits() {
    let c = case(vec![unit("A", 2.0, 10.0)], flat(2, 5.0), flat(2, 0.0), Mode::Cuc);
    let (mut model, _) = build(&c);
    assert!(model.add_binary("extra").is_err());
}

fn scipy_available() -> bool {
    Command::new("python3")
        .args(["-c", "import scipy.optimize; scipy.optimize.milp"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

#[test]
fn external_backend_agrees_with_highs() {
    if !scipy_available() {
        eprintln!("skipping: python3 with scipy.optimize.milp not found");
        return;
    }
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scripts/scipy_milp.py");
    let ext = ExternalBackend::new("python3").with_args([script.to_str().unwrap()]);
    let sol = ext.solve(&knapsack(), &tight()).unwrap();
    assert!((sol.objective - -8.0).abs() < 1e-6);

    let c = case(vec![unit("A", 2.0, 10.0), unit("B", 1.0, 6.0)], flat(3, 9.0), flat(3, 0.5), Mode::Cuc);
    let (model, _) = build(&c);
    let a = ext.solve(&model, &tight()).unwrap();
    let b = HighsBackend.solve(&model, &tight()).unwrap();
    assert!((a.objective - b.objective).abs() <= 1e-5 * b.objective.abs().max(1.0));
}

#[test]
fn external_backend_reports_a_failing_binary() {
    let ext = ExternalBackend::new("false");
    assert!(ext.solve(&knapsack(), &tight()).is_err());
}
