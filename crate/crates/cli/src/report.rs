//! On-disk artifact formats: trace/scan CSVs with a one-line header and a
//! fixed column order, and JSON summaries that echo the full resolved
//! configuration so every output file is self-describing.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use radblow::diagnostics::FunctionalTrace;

/// Echo of one simulation's full configuration and outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub run: String,
    pub kind: String,
    pub problem: ProblemEcho,
    pub grid: GridEcho,
    pub solver: SolverEcho,
    pub t_end_requested: f64,
    /// Blow-up is detected in the sup norm; the continuous alternative is
    /// stated in H^1 x L^2, which sup-norm growth implies at this scale.
    pub detection_norm: String,
    pub outcome: OutcomeEcho,
    pub audits: AuditEcho,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemEcho {
    pub n: u32,
    pub r0: f64,
    pub p: f64,
    pub eps: f64,
    pub support_radius: f64,
    pub profile: String,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridEcho {
    pub r0: f64,
    pub rmax: f64,
    pub m: usize,
    pub h: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverEcho {
    pub dt: f64,
    pub dt_min: f64,
    pub dt_out: f64,
    pub blowup_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeEcho {
    pub blew_up: bool,
    pub outcome: String,
    pub t_end: f64,
    pub t_blowup_est: Option<f64>,
    pub t_blowup_err: Option<f64>,
    pub f_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditEcho {
    /// Largest observed |u| beyond t + R + 2h relative to the sup norm,
    /// and the tolerance it is compared against.
    pub support_max_ratio: f64,
    pub support_tolerance: f64,
    pub support_ok: bool,
    /// Explicit lower-bound margin on F1 (min over output times).
    pub f1_margin: f64,
    pub f1_tolerance: f64,
    pub f1_ok: bool,
    /// Rows where F1 <= 0 before blow-up would break positivity.
    pub f1_positive: bool,
}

/// Certificate emitted by `diagnose`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub run: String,
    pub c0: f64,
    pub int_phi1_u0: f64,
    pub int_phi1_u1: f64,
    pub f1_margin: f64,
    pub f1_margin_at: f64,
    pub f1_tolerance: f64,
    pub identity_residual_rel: f64,
    pub k_theory: f64,
    pub k_fit: f64,
    pub inequality_violations: usize,
    pub delta_fit: f64,
    pub exponent_fit: f64,
    pub exponent_target: f64,
    pub window_t_lo: f64,
    pub window_t_hi: f64,
    pub window_rule: String,
    pub blowup_estimate: Option<f64>,
    pub blowup_estimate_err: Option<f64>,
}

/// Index of one executed plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanIndex {
    pub plan: String,
    pub kind: String,
    pub runs: Vec<IndexEntry>,
    pub audit_failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexEntry {
    pub run: String,
    pub ok: bool,
    pub audit_ok: bool,
    pub files: Vec<String>,
    pub error: Option<String>,
}

pub const TRACE_HEADER: &str = "t,f0,f1,sup_norm,l2_norm,nonlin_weighted,energy,support_ratio";

pub fn trace_to_csv(trace: &FunctionalTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for i in 0..trace.len() {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            trace.times[i],
            trace.f0[i],
            trace.f1[i],
            trace.sup_norm[i],
            trace.l2_norm[i],
            trace.nonlin_weighted[i],
            trace.energy[i],
            trace.support_ratio[i],
        );
    }
    out
}

pub fn trace_from_csv(text: &str) -> Result<FunctionalTrace, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty trace file")?;
    if header.trim() != TRACE_HEADER {
        return Err(format!("unexpected trace header `{header}`"));
    }
    let mut trace = FunctionalTrace::default();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("row {}: {e}", i + 2))?;
        if cols.len() != 8 {
            return Err(format!(
                "row {}: expected 8 columns, got {}",
                i + 2,
                cols.len()
            ));
        }
        trace.push(
            cols[0],
            radblow::diagnostics::TraceRow {
                f0: cols[1],
                f1: cols[2],
                sup_norm: cols[3],
                l2_norm: cols[4],
                nonlin_weighted: cols[5],
            },
            cols[6],
            cols[7],
        );
    }
    Ok(trace)
}

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}
