//! End-to-end checks of the plan runner and artifact formats.

use std::fs;

use radblow_cli::config::parse_config;
use radblow_cli::plan::{byte_identical_rerun, load_run, run_plan, PlanError};
use radblow_cli::report::PlanIndex;

fn tmp(name: &str) -> tempfile::TempDir {
    tempfile::Builder::new()
        .prefix(name)
        .tempdir()
        .expect("tempdir")
}

const SMALL_SIM: &str = "kind = simulate\nn = 3\np = 2\neps = 1\nR = 3\nt_end = 2\nh = 0.02\ndt = 4e-3\ndt_out = 0.25\n";

#[test]
fn simulate_plan_writes_trace_summary_and_index() {
    let dir = tmp("radblow-sim");
    let spec = parse_config(SMALL_SIM).unwrap();
    let outcome = run_plan(&spec, dir.path(), false, 1).unwrap();
    let loaded = load_run(&outcome.dir, "n3_p2_eps1").unwrap();
    assert!(loaded.trace.len() >= 8);
    assert_eq!(loaded.summary.problem.n, 3);
    assert_eq!(loaded.summary.grid.h, 0.02);
    // Full configuration is echoed.
    assert_eq!(loaded.summary.solver.dt_out, 0.25);
    let index: PlanIndex =
        serde_json::from_str(&fs::read_to_string(outcome.dir.join("index.json")).unwrap()).unwrap();
    assert_eq!(index.runs.len(), 1);
    assert!(index.runs[0].ok);
}

#[test]
fn overwrite_needs_force() {
    let dir = tmp("radblow-force");
    let spec = parse_config(SMALL_SIM).unwrap();
    run_plan(&spec, dir.path(), false, 1).unwrap();
    match run_plan(&spec, dir.path(), false, 1) {
        Err(PlanError::WouldOverwrite(_)) => {}
        other => panic!("expected WouldOverwrite, got {other:?}"),
    }
    // With force the plan reruns cleanly.
    run_plan(&spec, dir.path(), true, 1).unwrap();
}

#[test]
fn empty_simulate_sweep_is_impossible_but_scan_of_one_works() {
    let dir = tmp("radblow-scan1");
    let spec = parse_config(
        "kind = ode-scan\na = 2\nq = 1\np = 2\nk = 1\ndelta = 1\nR = 1\nhorizon = 1e5\n",
    )
    .unwrap();
    let outcome = run_plan(&spec, dir.path(), false, 1).unwrap();
    assert!(outcome.all_ok());
    let csv = fs::read_to_string(outcome.dir.join("scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "a,q,p,classification,blew_up,t_blowup_est,steps"
    );
    let row = lines.next().unwrap();
    assert!(row.contains("supercritical"), "{row}");
    assert!(row.contains("true"), "{row}");
}

#[test]
fn parallel_runs_are_byte_identical_to_serial() {
    let dir_a = tmp("radblow-det-a");
    let dir_b = tmp("radblow-det-b");
    let spec =
        parse_config("kind = simulate\nn = 3\np = 2\neps = 0.5, 1\nR = 3\nt_end = 1\nh = 0.05\ndt = 0.01\ndt_out = 0.25\n")
            .unwrap();
    let identical = byte_identical_rerun(&spec, dir_a.path(), dir_b.path(), 2).unwrap();
    assert!(identical);
}

#[test]
fn estimates_plan_emits_per_t_rows() {
    let dir = tmp("radblow-est");
    let spec = parse_config(
        "kind = estimates\nn = 3\np = 2\nR = 2\nh = 0.02\nt_min = 1\nt_max = 12\nsamples = 12\n",
    )
    .unwrap();
    let outcome = run_plan(&spec, dir.path(), false, 1).unwrap();
    let csv = fs::read_to_string(outcome.dir.join("estimates.csv")).unwrap();
    assert!(csv.starts_with("t,psi_integral,weighted_integral,bound,ratio_plain,ratio_weighted"));
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn testfn_plan_reports_residuals() {
    let dir = tmp("radblow-tf");
    let spec = parse_config("kind = testfn\nn = 2\nrmax = 6\nh = 0.005\n").unwrap();
    let outcome = run_plan(&spec, dir.path(), false, 1).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(outcome.dir.join("testfn.summary.json")).unwrap())
            .unwrap();
    assert!(summary["residual_harmonic"].as_f64().unwrap() < 1e-3);
    assert!(summary["residual_eigen"].as_f64().unwrap() < 1e-3);
    let csv = fs::read_to_string(outcome.dir.join("testfn.csv")).unwrap();
    assert!(csv.starts_with("r,phi0,phi1,ln_phi1"));
}
