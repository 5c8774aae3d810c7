//! Deterministic plan execution.
//!
//! Every run writes its own files (atomically, temp-then-rename) and the
//! index is assembled in plan order after all runs finish, so re-running
//! an identical plan byte-reproduces every artifact regardless of the
//! worker count. Existing output files are never overwritten without
//! `force`.

use std::error::Error;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use radblow::diagnostics::{f1_bound_certificate, FunctionalTrace};
use radblow::estimates::{envelope_exponent, fit_decay, sweep};
use radblow::grid::{Dimension, RadialGrid};
use radblow::ode::{self, DetectionParams, OdeVariant, RunOutcome};
use radblow::problem::{Profile, RadialProblem};
use radblow::solver::{run as run_solver, Probes, SolverConfig};
use radblow::testfn::TestFunctionSet;

use crate::config::{EstimatesPlan, OdeScanPlan, PlanKind, PlanSpec, SimulateRun, TestFnPlan};
use crate::report::{
    to_json_pretty, trace_to_csv, write_atomic, AuditEcho, GridEcho, IndexEntry, OutcomeEcho,
    PlanIndex, ProblemEcho, SimulationSummary, SolverEcho,
};

#[derive(Debug)]
pub enum PlanError {
    Io(io::Error),
    WouldOverwrite(PathBuf),
    Setup(String),
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::Io(e) => write!(f, "io error: {e}"),
            PlanError::WouldOverwrite(p) => {
                write!(f, "refusing to overwrite {} (pass --force)", p.display())
            }
            PlanError::Setup(msg) => write!(f, "{msg}"),
        }
    }
}

impl Error for PlanError {}

impl From<io::Error> for PlanError {
    fn from(e: io::Error) -> Self {
        PlanError::Io(e)
    }
}

#[derive(Debug)]
pub struct PlanOutcome {
    pub index: PlanIndex,
    pub dir: PathBuf,
}

impl PlanOutcome {
    pub fn all_ok(&self) -> bool {
        self.index.audit_failures == 0 && self.index.runs.iter().all(|r| r.ok)
    }
}

/// Execute a plan under `out_root/<plan name>/`.
pub fn run_plan(
    spec: &PlanSpec,
    out_root: &Path,
    force: bool,
    jobs: usize,
) -> Result<PlanOutcome, PlanError> {
    let dir = out_root.join(&spec.name);
    fs::create_dir_all(&dir)?;

    let planned = planned_files(spec);
    if !force {
        for f in &planned {
            let p = dir.join(f);
            if p.exists() {
                return Err(PlanError::WouldOverwrite(p));
            }
        }
    }

    let (kind, entries) = match &spec.kind {
        PlanKind::Simulate(runs) => ("simulate", run_simulations(runs, &dir, jobs)),
        PlanKind::OdeScan(scan) => ("ode-scan", vec![run_ode_scan(scan, &dir)]),
        PlanKind::Estimates(est) => ("estimates", vec![run_estimates(est, &dir)]),
        PlanKind::TestFn(tf) => ("testfn", vec![run_testfn(tf, &dir)]),
    };

    let audit_failures = entries.iter().filter(|e| !e.audit_ok).count();
    let index = PlanIndex {
        plan: spec.name.clone(),
        kind: kind.into(),
        runs: entries,
        audit_failures,
    };
    write_atomic(&dir.join("index.json"), &to_json_pretty(&index))?;
    Ok(PlanOutcome { index, dir })
}

fn planned_files(spec: &PlanSpec) -> Vec<String> {
    let mut files = vec!["index.json".to_string()];
    match &spec.kind {
        PlanKind::Simulate(runs) => {
            for r in runs {
                files.push(format!("{}.trace.csv", r.name));
                files.push(format!("{}.summary.json", r.name));
            }
        }
        PlanKind::OdeScan(_) => {
            files.push("scan.csv".into());
            files.push("scan.summary.json".into());
        }
        PlanKind::Estimates(_) => {
            files.push("estimates.csv".into());
            files.push("estimates.summary.json".into());
        }
        PlanKind::TestFn(_) => {
            files.push("testfn.csv".into());
            files.push("testfn.summary.json".into());
        }
    }
    files
}

fn run_simulations(runs: &[SimulateRun], dir: &Path, jobs: usize) -> Vec<IndexEntry> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("worker pool");
    pool.install(|| {
        use rayon::prelude::*;
        runs.par_iter().map(|r| simulate_one(r, dir)).collect()
    })
}

/// Build the immutable pieces of one simulation run.
pub fn build_simulation(r: &SimulateRun) -> Result<(RadialProblem, Probes, SolverConfig), String> {
    let dim = Dimension::new(r.n, r.r0).map_err(|e| e.to_string())?;
    let bump = Profile::QuarticBump {
        center: r.center,
        width: r.width,
    };
    let problem = RadialProblem::new(dim, r.p, r.eps, bump, bump, r.support_radius)
        .map_err(|e| e.to_string())?;
    let grid =
        RadialGrid::for_horizon(&dim, r.support_radius, r.t_end, r.h).map_err(|e| e.to_string())?;
    let tf = TestFunctionSet::build(dim, grid).map_err(|e| e.to_string())?;
    let probes = Probes::new(tf, r.dt_out);
    let cfg = SolverConfig {
        dt: r.dt,
        blowup_threshold: r.blowup_threshold,
        dt_min: r.dt_min,
        ..Default::default()
    };
    Ok((problem, probes, cfg))
}

fn simulate_one(r: &SimulateRun, dir: &Path) -> IndexEntry {
    let files = vec![
        format!("{}.trace.csv", r.name),
        format!("{}.summary.json", r.name),
    ];
    let (problem, probes, cfg) = match build_simulation(r) {
        Ok(b) => b,
        Err(e) => return failed_entry(&r.name, files, e),
    };
    let tf = &probes.tf;
    let (trace, report) = match run_solver(&problem, &cfg, r.t_end, &probes) {
        Ok(v) => v,
        Err(e) => return failed_entry(&r.name, files, e.to_string()),
    };

    let support_max = trace.support_ratio.iter().cloned().fold(0.0f64, f64::max);
    let support_ok = support_max <= probes.support_tol;
    let cert = f1_bound_certificate(&problem, tf, &trace);
    let (f1_margin, f1_tol, f1_ok) = cert
        .as_ref()
        .map(|c| (c.margin, c.tolerance, c.holds))
        .unwrap_or((f64::NAN, f64::NAN, false));
    let f1_positive = trace.f1.iter().all(|&x| x > 0.0);

    let summary = SimulationSummary {
        run: r.name.clone(),
        kind: "simulate".into(),
        problem: ProblemEcho {
            n: r.n,
            r0: problem.dim.boundary_radius(),
            p: r.p,
            eps: r.eps,
            support_radius: r.support_radius,
            profile: "bump".into(),
            center: r.center,
            width: r.width,
        },
        grid: GridEcho {
            r0: tf.grid.r0(),
            rmax: tf.grid.rmax(),
            m: tf.grid.len(),
            h: tf.grid.h(),
        },
        solver: SolverEcho {
            dt: r.dt,
            dt_min: r.dt_min,
            dt_out: r.dt_out,
            blowup_threshold: r.blowup_threshold,
        },
        t_end_requested: r.t_end,
        detection_norm: "sup".into(),
        outcome: OutcomeEcho {
            blew_up: report.blew_up,
            outcome: outcome_name(report.outcome).into(),
            t_end: report.t_end,
            t_blowup_est: report.t_blowup_est,
            t_blowup_err: report.t_blowup_err,
            f_max: report.f_max,
            steps: report.steps,
        },
        audits: AuditEcho {
            support_max_ratio: support_max,
            support_tolerance: probes.support_tol,
            support_ok,
            f1_margin,
            f1_tolerance: f1_tol,
            f1_ok,
            f1_positive,
        },
    };

    if let Err(e) = write_atomic(&dir.join(&files[0]), &trace_to_csv(&trace)) {
        return failed_entry(&r.name, files, e.to_string());
    }
    if let Err(e) = write_atomic(&dir.join(&files[1]), &to_json_pretty(&summary)) {
        return failed_entry(&r.name, files, e.to_string());
    }
    IndexEntry {
        run: r.name.clone(),
        ok: true,
        audit_ok: support_ok && f1_ok && f1_positive,
        files,
        error: None,
    }
}

pub fn outcome_name(o: RunOutcome) -> &'static str {
    match o {
        RunOutcome::BlewUp => "blew-up",
        RunOutcome::HorizonReached => "horizon-reached",
        RunOutcome::Inconclusive => "inconclusive",
    }
}

fn failed_entry(name: &str, files: Vec<String>, error: String) -> IndexEntry {
    IndexEntry {
        run: name.into(),
        ok: false,
        audit_ok: false,
        files,
        error: Some(error),
    }
}

fn run_ode_scan(scan: &OdeScanPlan, dir: &Path) -> IndexEntry {
    let files = vec!["scan.csv".to_string(), "scan.summary.json".to_string()];
    let det = DetectionParams::default();
    let mut csv = String::new();
    let mut summary = serde_json::Map::new();
    summary.insert("kind".into(), "ode-scan".into());
    summary.insert("variant".into(), scan.variant.clone().into());
    summary.insert(
        "parameters".into(),
        serde_json::json!({
            "k": scan.k, "delta": scan.delta, "R": scan.shift,
            "horizon": scan.horizon, "k1": scan.k1, "t0": scan.t0,
        }),
    );

    let mut audit_ok = true;
    if scan.variant == "log-critical" {
        let spec = match ode::OdeBlowupSpec::log_critical(
            scan.p[0], scan.a[0], scan.q[0], scan.k0[0], scan.k1, scan.t0, scan.shift,
        ) {
            Ok(s) => s,
            Err(e) => return failed_entry("scan", files, e.to_string()),
        };
        let rows = match ode::critical_threshold_scan(&spec, &scan.k0, scan.horizon, &det) {
            Ok(r) => r,
            Err(e) => return failed_entry("scan", files, e.to_string()),
        };
        csv.push_str("k0,blew_up,outcome,t_blowup_est,f_max,steps\n");
        for (k0, rep) in &rows {
            let _ = writeln!(
                csv,
                "{:e},{},{},{},{:e},{}",
                k0,
                rep.blew_up,
                outcome_name(rep.outcome),
                rep.t_blowup_est
                    .map(|t| format!("{t:e}"))
                    .unwrap_or_default(),
                rep.f_max,
                rep.steps
            );
        }
        let threshold = ode::empirical_threshold(&rows).map(|i| rows[i].0);
        // Monotone scan: everything above the first blowing-up K0 blows up.
        if let Some(i) = ode::empirical_threshold(&rows) {
            audit_ok = rows[i..].iter().all(|(_, r)| r.blew_up);
        }
        summary.insert(
            "empirical_threshold".into(),
            serde_json::to_value(threshold).unwrap(),
        );
        summary.insert("monotone".into(), audit_ok.into());
    } else {
        let variant = if scan.variant == "log-subcritical" {
            OdeVariant::LogSubcritical
        } else {
            OdeVariant::Plain
        };
        let cells = ode::classify_grid(
            &scan.a,
            &scan.q,
            &scan.p,
            scan.k,
            scan.delta,
            scan.shift,
            scan.horizon,
            variant,
            &det,
        );
        csv.push_str("a,q,p,classification,blew_up,t_blowup_est,steps\n");
        let mut supercritical_misses = 0usize;
        let mut errors = 0usize;
        for c in &cells {
            match &c.report {
                Ok(rep) => {
                    let _ = writeln!(
                        csv,
                        "{:e},{:e},{:e},{},{},{},{}",
                        c.a,
                        c.q,
                        c.p,
                        c.class,
                        rep.blew_up,
                        rep.t_blowup_est
                            .map(|t| format!("{t:e}"))
                            .unwrap_or_default(),
                        rep.steps
                    );
                    if c.class == ode::Criticality::Supercritical && !rep.blew_up {
                        supercritical_misses += 1;
                    }
                }
                Err(e) => {
                    errors += 1;
                    let _ = writeln!(
                        csv,
                        "{:e},{:e},{:e},{},error: {e},,",
                        c.a, c.q, c.p, c.class
                    );
                }
            }
        }
        // Supercritical cells must blow up; subcritical outcomes are
        // recorded, not asserted.
        audit_ok = supercritical_misses == 0 && errors == 0;
        summary.insert("cells".into(), cells.len().into());
        summary.insert("supercritical_misses".into(), supercritical_misses.into());
        summary.insert("errors".into(), errors.into());
    }

    if let Err(e) = write_atomic(&dir.join(&files[0]), &csv) {
        return failed_entry("scan", files, e.to_string());
    }
    let json = to_json_pretty(&serde_json::Value::Object(summary));
    if let Err(e) = write_atomic(&dir.join(&files[1]), &json) {
        return failed_entry("scan", files, e.to_string());
    }
    IndexEntry {
        run: "scan".into(),
        ok: true,
        audit_ok,
        files,
        error: None,
    }
}

fn run_estimates(est: &EstimatesPlan, dir: &Path) -> IndexEntry {
    let files = vec![
        "estimates.csv".to_string(),
        "estimates.summary.json".to_string(),
    ];
    let dim = match Dimension::new(est.n, 1.0) {
        Ok(d) => d,
        Err(e) => return failed_entry("estimates", files, e.to_string()),
    };
    let rmax = est.t_max + est.support_radius + 1.0;
    let grid = match RadialGrid::with_spacing(dim.boundary_radius(), rmax, est.h) {
        Ok(g) => g,
        Err(e) => return failed_entry("estimates", files, e.to_string()),
    };
    let tf = match TestFunctionSet::build(dim, grid) {
        Ok(t) => t,
        Err(e) => return failed_entry("estimates", files, e.to_string()),
    };
    let ts: Vec<f64> = (0..est.samples)
        .map(|i| est.t_min + (est.t_max - est.t_min) * i as f64 / (est.samples - 1) as f64)
        .collect();
    let rows = match sweep(&tf, est.p, &ts, est.support_radius) {
        Ok(r) => r,
        Err(e) => return failed_entry("estimates", files, e.to_string()),
    };

    let target = envelope_exponent(est.n, est.p);
    let r = est.support_radius;
    let mut csv = String::from("t,psi_integral,weighted_integral,bound,ratio_plain,ratio_weighted");
    let n2 = est.n == 2;
    if n2 {
        csv.push_str(",bound_log,ratio_weighted_log");
    }
    csv.push('\n');
    for &(t, i7, i8) in &rows {
        let s = t + r;
        let bound = s.powf(target);
        let _ = write!(
            csv,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            t,
            i7,
            i8,
            bound,
            i7 / bound,
            i8 / bound
        );
        if n2 {
            let bound_log =
                s.powf(1.0 - (est.p / (est.p - 1.0)) / 2.0) * s.ln().powf(-1.0 / (est.p - 1.0));
            let _ = write!(csv, ",{:e},{:e}", bound_log, i8 / bound_log);
        }
        csv.push('\n');
    }

    let s7: Vec<(f64, f64)> = rows.iter().map(|&(t, a, _)| (t, a)).collect();
    let s8: Vec<(f64, f64)> = rows.iter().map(|&(t, _, b)| (t, b)).collect();
    let fit7 = fit_decay(&s7, r, target, None);
    let fit8 = fit_decay(&s8, r, target, None);
    let mut summary = serde_json::json!({
        "kind": "estimates",
        "n": est.n, "p": est.p, "R": est.support_radius, "h": est.h,
        "t_min": est.t_min, "t_max": est.t_max, "samples": est.samples,
        "envelope_exponent": target,
        "r1": est.r1,
    });
    if let (Ok(f7), Ok(f8)) = (&fit7, &fit8) {
        summary["psi_integral"] = serde_json::json!({
            "fitted_exponent": f7.fitted_exponent, "max_ratio": f7.max_ratio,
        });
        summary["weighted_integral"] = serde_json::json!({
            "fitted_exponent": f8.fitted_exponent, "max_ratio": f8.max_ratio,
        });
    }
    if n2 {
        let log_corr = -1.0 / (est.p - 1.0);
        let late: Vec<(f64, f64)> = s8.iter().filter(|&&(t, _)| t >= est.r1).cloned().collect();
        if late.len() >= 8 {
            if let Ok(f8l) = fit_decay(
                &late,
                r,
                1.0 - (est.p / (est.p - 1.0)) / 2.0,
                Some(log_corr),
            ) {
                summary["weighted_integral_log_refined"] = serde_json::json!({
                    "fitted_exponent": f8l.fitted_exponent,
                    "max_ratio": f8l.max_ratio,
                    "argmax_index": f8l.argmax_ratio,
                });
            }
        }
    }

    if let Err(e) = write_atomic(&dir.join(&files[0]), &csv) {
        return failed_entry("estimates", files, e.to_string());
    }
    if let Err(e) = write_atomic(&dir.join(&files[1]), &to_json_pretty(&summary)) {
        return failed_entry("estimates", files, e.to_string());
    }
    IndexEntry {
        run: "estimates".into(),
        ok: true,
        audit_ok: fit7.is_ok() && fit8.is_ok(),
        files,
        error: None,
    }
}

fn run_testfn(plan: &TestFnPlan, dir: &Path) -> IndexEntry {
    let files = vec!["testfn.csv".to_string(), "testfn.summary.json".to_string()];
    let dim = match Dimension::new(plan.n, plan.r0) {
        Ok(d) => d,
        Err(e) => return failed_entry("testfn", files, e.to_string()),
    };
    let grid = match RadialGrid::with_spacing(dim.boundary_radius(), plan.rmax, plan.h) {
        Ok(g) => g,
        Err(e) => return failed_entry("testfn", files, e.to_string()),
    };
    let tf = match TestFunctionSet::build(dim, grid) {
        Ok(t) => t,
        Err(e) => return failed_entry("testfn", files, e.to_string()),
    };
    let mut csv = String::from("r,phi0,phi1,ln_phi1\n");
    for i in 0..tf.grid.len() {
        let _ = writeln!(
            csv,
            "{:e},{:e},{:e},{:e}",
            tf.grid.node(i),
            tf.phi0[i],
            tf.phi1[i],
            tf.ln_phi1[i]
        );
    }
    let growth = tf.growth_rate_fit();
    let target = 1.0 / std::f64::consts::SQRT_2;
    let summary = serde_json::json!({
        "kind": "testfn",
        "n": plan.n, "r0": plan.r0, "rmax": tf.grid.rmax(), "h": tf.grid.h(),
        "m": tf.grid.len(),
        "residual_harmonic": tf.residual_harmonic(),
        "residual_eigen": tf.residual_eigen(),
        "growth_rate_fit": growth,
        "growth_rate_target": target,
    });
    let audit_ok = tf.residual_harmonic().is_finite()
        && tf.residual_eigen().is_finite()
        && (growth - target).abs() <= 0.02 * target;
    if let Err(e) = write_atomic(&dir.join(&files[0]), &csv) {
        return failed_entry("testfn", files, e.to_string());
    }
    if let Err(e) = write_atomic(&dir.join(&files[1]), &to_json_pretty(&summary)) {
        return failed_entry("testfn", files, e.to_string());
    }
    IndexEntry {
        run: "testfn".into(),
        ok: true,
        audit_ok,
        files,
        error: None,
    }
}

/// Re-run helper used by the determinism audit: execute the same plan into
/// two directories and compare artifact bytes.
pub fn byte_identical_rerun(
    spec: &PlanSpec,
    dir_a: &Path,
    dir_b: &Path,
    jobs: usize,
) -> Result<bool, PlanError> {
    let a = run_plan(spec, dir_a, true, jobs)?;
    let b = run_plan(spec, dir_b, true, jobs)?;
    for (ra, rb) in a.index.runs.iter().zip(&b.index.runs) {
        for (fa, fb) in ra.files.iter().zip(&rb.files) {
            let ba = fs::read(a.dir.join(fa))?;
            let bb = fs::read(b.dir.join(fb))?;
            if ba != bb {
                return Ok(false);
            }
        }
    }
    let ia = fs::read(a.dir.join("index.json"))?;
    let ib = fs::read(b.dir.join("index.json"))?;
    Ok(ia == ib)
}

#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub trace: FunctionalTrace,
    pub summary: SimulationSummary,
}

/// Load one simulation run's artifacts back from disk.
pub fn load_run(dir: &Path, name: &str) -> Result<LoadedRun, String> {
    let trace_text =
        fs::read_to_string(dir.join(format!("{name}.trace.csv"))).map_err(|e| e.to_string())?;
    let trace = crate::report::trace_from_csv(&trace_text)?;
    let summary_text =
        fs::read_to_string(dir.join(format!("{name}.summary.json"))).map_err(|e| e.to_string())?;
    let summary: SimulationSummary =
        serde_json::from_str(&summary_text).map_err(|e| e.to_string())?;
    Ok(LoadedRun { trace, summary })
}
