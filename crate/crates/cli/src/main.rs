//! `radblow` command line: one subcommand per module of the laboratory.
//!
//! Exit codes: 0 success, 1 audit or acceptance failure, 2 configuration
//! or usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use radblow::diagnostics::{
    check_differential_inequality, check_f0_identity, check_f0_lower_bound,
    extrapolate_blowup_time, f1_bound_certificate, lower_bound_exponent, theoretical_k, WindowRule,
};
use radblow::grid::{Dimension, RadialGrid};
use radblow::problem::{Profile as DataProfile, RadialProblem};
use radblow::testfn::TestFunctionSet;

use radblow_cli::acceptance::{run_all, Profile};
use radblow_cli::config::parse_config;
use radblow_cli::plan::run_plan;
use radblow_cli::report::{
    to_json_pretty, trace_from_csv, write_atomic, Certificate, SimulationSummary,
};

struct Options {
    config: Option<PathBuf>,
    out: PathBuf,
    force: bool,
    jobs: usize,
    profile: Profile,
    trace: Option<PathBuf>,
    summary: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        print_usage();
        return ExitCode::from(if args.is_empty() { 2 } else { 0 });
    }
    let subcommand = args[0].clone();
    let opts = match parse_options(&args[1..]) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!("run `radblow --help` for usage");
            return ExitCode::from(2);
        }
    };

    match subcommand.as_str() {
        "testfn" | "estimates" | "ode-scan" | "simulate" => {
            run_config_subcommand(&subcommand, &opts)
        }
        "diagnose" => run_diagnose(&opts),
        "accept" => run_accept(&opts),
        other => {
            eprintln!("error: unknown subcommand `{other}`");
            print_usage();
            ExitCode::from(2)
        }
    }
}

fn parse_options(args: &[String]) -> Result<Options, String> {
    let mut opts = Options {
        config: None,
        out: PathBuf::from("out"),
        force: false,
        jobs: 1,
        profile: Profile::Default,
        trace: None,
        summary: None,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value = |name: &str| -> Result<String, String> {
            it.next()
                .cloned()
                .ok_or_else(|| format!("flag {name} needs a value"))
        };
        match arg.as_str() {
            "--config" => opts.config = Some(PathBuf::from(value("--config")?)),
            "--out" => opts.out = PathBuf::from(value("--out")?),
            "--force" => opts.force = true,
            "--jobs" => {
                let v = value("--jobs")?;
                opts.jobs = v
                    .parse::<usize>()
                    .map_err(|_| format!("--jobs expects a positive integer, got `{v}`"))?;
                if opts.jobs == 0 {
                    return Err("--jobs must be at least 1".into());
                }
            }
            "--tolerance-profile" => {
                opts.profile = match value("--tolerance-profile")?.as_str() {
                    "default" => Profile::Default,
                    "tight" => Profile::Tight,
                    other => {
                        return Err(format!(
                            "--tolerance-profile expects default or tight, got `{other}`"
                        ))
                    }
                }
            }
            "--trace" => opts.trace = Some(PathBuf::from(value("--trace")?)),
            "--summary" => opts.summary = Some(PathBuf::from(value("--summary")?)),
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    Ok(opts)
}

fn run_config_subcommand(subcommand: &str, opts: &Options) -> ExitCode {
    let config_path = match &opts.config {
        Some(p) => p,
        None => {
            eprintln!("error: `{subcommand}` needs --config <path>");
            return ExitCode::from(2);
        }
    };
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let spec = match parse_config(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let expected = matches!(
        (&spec.kind, subcommand),
        (radblow_cli::config::PlanKind::Simulate(_), "simulate")
            | (radblow_cli::config::PlanKind::OdeScan(_), "ode-scan")
            | (radblow_cli::config::PlanKind::Estimates(_), "estimates")
            | (radblow_cli::config::PlanKind::TestFn(_), "testfn")
    );
    if !expected {
        eprintln!("config error: config kind does not match subcommand `{subcommand}`");
        return ExitCode::from(2);
    }
    match run_plan(&spec, &opts.out, opts.force, opts.jobs) {
        Ok(outcome) => {
            for entry in &outcome.index.runs {
                let status = if !entry.ok {
                    "error"
                } else if entry.audit_ok {
                    "ok"
                } else {
                    "audit-failed"
                };
                println!("{}: {status}", entry.run);
                if let Some(err) = &entry.error {
                    println!("  {err}");
                }
            }
            println!("artifacts in {}", outcome.dir.display());
            if outcome.all_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(radblow_cli::plan::PlanError::WouldOverwrite(p)) => {
            eprintln!(
                "config error: refusing to overwrite {} (pass --force)",
                p.display()
            );
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run_diagnose(opts: &Options) -> ExitCode {
    let (trace_path, summary_path) = match (&opts.trace, &opts.summary) {
        (Some(t), Some(s)) => (t, s),
        _ => {
            eprintln!("error: `diagnose` needs --trace <csv> and --summary <json>");
            return ExitCode::from(2);
        }
    };
    match diagnose(trace_path, summary_path, &opts.out, opts.force) {
        Ok((path, ok)) => {
            println!("certificate written to {}", path.display());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn diagnose(
    trace_path: &Path,
    summary_path: &Path,
    out: &Path,
    force: bool,
) -> Result<(PathBuf, bool), String> {
    let trace_text = fs::read_to_string(trace_path).map_err(|e| e.to_string())?;
    let trace = trace_from_csv(&trace_text)?;
    let summary_text = fs::read_to_string(summary_path).map_err(|e| e.to_string())?;
    let summary: SimulationSummary =
        serde_json::from_str(&summary_text).map_err(|e| e.to_string())?;

    let pe = &summary.problem;
    let dim = Dimension::new(pe.n, pe.r0).map_err(|e| e.to_string())?;
    let bump = DataProfile::QuarticBump {
        center: pe.center,
        width: pe.width,
    };
    let problem = RadialProblem::new(dim, pe.p, pe.eps, bump, bump, pe.support_radius)
        .map_err(|e| e.to_string())?;
    let grid = RadialGrid::new(summary.grid.r0, summary.grid.rmax, summary.grid.m)
        .map_err(|e| e.to_string())?;
    let tf = TestFunctionSet::build(dim, grid).map_err(|e| e.to_string())?;

    let cert9 = f1_bound_certificate(&problem, &tf, &trace).map_err(|e| e.to_string())?;
    let rule = WindowRule::default();
    let (w_lo, w_hi) = rule.select(&trace).map_err(|e| e.to_string())?;
    let (_, identity_rel) =
        check_f0_identity(&trace.window(0.0, w_hi)).map_err(|e| e.to_string())?;
    let k_theory = theoretical_k(pe.n, pe.p, dim.unit_ball_volume());
    let ineq = check_differential_inequality(&trace, pe.n, pe.p, pe.support_radius, k_theory, 1e-3)
        .map_err(|e| e.to_string())?;
    let (delta_fit, exponent_fit) =
        check_f0_lower_bound(&trace.window(w_lo, w_hi), pe.n, pe.p, pe.support_radius)
            .map_err(|e| e.to_string())?;
    let blowup = extrapolate_blowup_time(&trace, pe.p).ok();

    let cert = Certificate {
        run: summary.run.clone(),
        c0: cert9.c0,
        int_phi1_u0: cert9.int_phi1_u0,
        int_phi1_u1: cert9.int_phi1_u1,
        f1_margin: cert9.margin,
        f1_margin_at: cert9.argmin_t,
        f1_tolerance: cert9.tolerance,
        identity_residual_rel: identity_rel,
        k_theory,
        k_fit: ineq.k_fit,
        inequality_violations: ineq.violations,
        delta_fit,
        exponent_fit,
        exponent_target: lower_bound_exponent(pe.n, pe.p),
        window_t_lo: w_lo,
        window_t_hi: w_hi,
        window_rule: format!(
            "second half of pre-spike trace (sup growth cut {}, fraction {})",
            rule.sup_growth_cut, rule.fraction
        ),
        blowup_estimate: blowup.as_ref().map(|b| b.time),
        blowup_estimate_err: blowup.as_ref().map(|b| b.half_width),
    };

    fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let path = out.join(format!("{}.certificate.json", summary.run));
    if path.exists() && !force {
        return Err(format!(
            "refusing to overwrite {} (pass --force)",
            path.display()
        ));
    }
    write_atomic(&path, &to_json_pretty(&cert)).map_err(|e| e.to_string())?;
    let ok = cert9.margin >= -cert9.tolerance && ineq.violations == 0 && identity_rel < 0.02;
    Ok((path, ok))
}

fn run_accept(opts: &Options) -> ExitCode {
    let work = opts.out.join("acceptance");
    if let Err(e) = fs::create_dir_all(&work) {
        eprintln!("error: cannot create {}: {e}", work.display());
        return ExitCode::from(2);
    }
    let outcomes = run_all(opts.profile, &work);
    let mut all_ok = true;
    for o in &outcomes {
        println!("{}", o.line());
        all_ok &= o.passed;
    }
    let report: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| {
            serde_json::json!({
                "id": o.id, "name": o.name, "passed": o.passed, "details": o.details,
            })
        })
        .collect();
    let path = work.join("acceptance_report.json");
    if let Err(e) = write_atomic(&path, &to_json_pretty(&report)) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(2);
    }
    println!(
        "{} of {} criteria passed; report at {}",
        outcomes.iter().filter(|o| o.passed).count(),
        outcomes.len(),
        path.display()
    );
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn print_usage() {
    println!("radblow - numerical laboratory for blow-up of strongly damped waves");
    println!();
    println!("Usage: radblow <subcommand> [options]");
    println!();
    println!("Subcommands:");
    println!("  testfn     sample phi0/phi1 and their residuals     (needs --config)");
    println!("  estimates  weighted-integral decay sweep            (needs --config)");
    println!("  ode-scan   comparison-ODE parameter scans           (needs --config)");
    println!("  simulate   PDE runs with functional traces          (needs --config)");
    println!("  diagnose   certificate from a trace + summary       (needs --trace, --summary)");
    println!("  accept     run the acceptance suite end-to-end");
    println!();
    println!("Options:");
    println!("  --config <path>               plain-text key = value plan");
    println!("  --out <dir>                   output directory (default: out)");
    println!("  --force                       allow overwriting existing artifacts");
    println!("  --jobs <k>                    worker count for independent runs (default: 1)");
    println!("  --tolerance-profile <p>       default | tight");
    println!("  --trace <csv>                 trace file for diagnose");
    println!("  --summary <json>              run summary for diagnose");
    println!();
    println!("Exit codes: 0 success, 1 audit/acceptance failure, 2 config error.");
}
