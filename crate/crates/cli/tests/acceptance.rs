//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line (visible with `--nocapture`; on failure the line is in the panic
//! message). Criteria that share the reference simulation reuse one cached
//! run per test process.

use std::path::PathBuf;
use std::sync::OnceLock;

use radblow_cli::acceptance::{run_criterion, Profile};

fn work_dir() -> &'static PathBuf {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = std::env::temp_dir().join(format!("radblow-acceptance-{}", std::process::id()));
        std::fs::create_dir_all(&dir).expect("acceptance scratch dir");
        dir
    })
}

fn check(id: usize) {
    check_with(id, Profile::Default)
}

fn check_with(id: usize, profile: Profile) {
    let outcome = run_criterion(id, profile, work_dir());
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_strauss_exponent() {
    check(1);
}

#[test]
fn criterion_02_test_functions() {
    check(2);
}

#[test]
fn criterion_03_ode_blowup_oracle_default_profile() {
    check(3);
}

#[test]
fn criterion_03_ode_blowup_oracle_tight_profile() {
    check_with(3, Profile::Tight);
}

#[test]
fn criterion_04_supercritical_grid() {
    check(4);
}

#[test]
fn criterion_05_critical_threshold_scan() {
    check(5);
}

#[test]
fn criterion_06_weighted_integral_rates() {
    check(6);
}

#[test]
fn criterion_07_reference_blowup_run() {
    check(7);
}

#[test]
fn criterion_08_eps_monotonicity() {
    check(8);
}

#[test]
fn criterion_09_ode_pde_consistency() {
    check(9);
}

#[test]
fn criterion_10_byte_determinism() {
    check(10);
}
