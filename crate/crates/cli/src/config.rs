//! Plain-text `key = value` experiment configuration.
//!
//! One file describes one plan. Lines are `key = value` pairs, `#` starts
//! a comment, blank lines are skipped. Unknown keys are errors (no silent
//! typo tolerance), each naming the offending key and line. List-valued
//! keys take comma-separated entries and expand into one run per
//! combination.

use std::error::Error;
use std::fmt;

use radblow::grid::strauss_exponent;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey {
        key: String,
        line: usize,
    },
    MissingKey {
        key: &'static str,
    },
    BadValue {
        key: String,
        line: usize,
        msg: String,
    },
    BadSyntax {
        line: usize,
    },
    Invariant {
        msg: String,
    },
    DuplicateRun {
        name: String,
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey { key, line } => {
                write!(f, "line {line}: unknown key `{key}`")
            }
            ConfigError::MissingKey { key } => write!(f, "missing required key `{key}`"),
            ConfigError::BadValue { key, line, msg } => {
                write!(f, "line {line}: key `{key}`: {msg}")
            }
            ConfigError::BadSyntax { line } => {
                write!(f, "line {line}: expected `key = value`")
            }
            ConfigError::Invariant { msg } => write!(f, "{msg}"),
            ConfigError::DuplicateRun { name } => write!(f, "duplicate run name `{name}`"),
        }
    }
}

impl Error for ConfigError {}

/// One parsed simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateRun {
    pub name: String,
    pub n: u32,
    pub r0: f64,
    pub p: f64,
    pub eps: f64,
    pub support_radius: f64,
    pub center: f64,
    pub width: f64,
    pub h: f64,
    pub dt: f64,
    pub dt_out: f64,
    pub t_end: f64,
    pub blowup_threshold: f64,
    pub dt_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeScanPlan {
    pub variant: String,
    pub a: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub k: f64,
    pub delta: f64,
    pub shift: f64,
    pub horizon: f64,
    /// log-critical extras
    pub k0: Vec<f64>,
    pub k1: f64,
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatesPlan {
    pub n: u32,
    pub p: f64,
    pub support_radius: f64,
    pub h: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    /// Window start for the n = 2 log-refined bound.
    pub r1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFnPlan {
    pub n: u32,
    pub r0: f64,
    pub rmax: f64,
    pub h: f64,
}

/// A validated experiment plan.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanKind {
    Simulate(Vec<SimulateRun>),
    OdeScan(OdeScanPlan),
    Estimates(EstimatesPlan),
    TestFn(TestFnPlan),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanSpec {
    pub name: String,
    pub kind: PlanKind,
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    used: std::cell::Cell<bool>,
}

struct Doc {
    entries: Vec<Entry>,
}

impl Doc {
    fn parse(text: &str) -> Result<Doc, ConfigError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped
                .split_once('=')
                .ok_or(ConfigError::BadSyntax { line })?;
            entries.push(Entry {
                key: key.trim().to_string(),
                value: value.trim().to_string(),
                line,
                used: std::cell::Cell::new(false),
            });
        }
        Ok(Doc { entries })
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| {
            if e.key == key {
                e.used.set(true);
                true
            } else {
                false
            }
        })
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => parse_f64(&e.value)
                .map(Some)
                .map_err(|msg| ConfigError::BadValue {
                    key: key.into(),
                    line: e.line,
                    msg,
                }),
        }
    }

    fn f64_req(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.f64(key)?.ok_or(ConfigError::MissingKey { key })
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => {
                let mut out = Vec::new();
                for part in e.value.split(',') {
                    out.push(parse_f64(part.trim()).map_err(|msg| ConfigError::BadValue {
                        key: key.into(),
                        line: e.line,
                        msg,
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    fn u32_req(&self, key: &'static str) -> Result<u32, ConfigError> {
        let e = self.get(key).ok_or(ConfigError::MissingKey { key })?;
        e.value.parse::<u32>().map_err(|_| ConfigError::BadValue {
            key: key.into(),
            line: e.line,
            msg: format!("expected a positive integer, got `{}`", e.value),
        })
    }

    fn string_or(&self, key: &str, default: &str) -> String {
        self.get(key)
            .map(|e| e.value.clone())
            .unwrap_or_else(|| default.to_string())
    }

    fn check_all_used(&self) -> Result<(), ConfigError> {
        for e in &self.entries {
            if !e.used.get() {
                return Err(ConfigError::UnknownKey {
                    key: e.key.clone(),
                    line: e.line,
                });
            }
        }
        Ok(())
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = if s == "pc2" {
        // Shorthand for the n = 2 critical exponent.
        strauss_exponent(2).unwrap()
    } else {
        s.parse()
            .map_err(|_| format!("expected a number, got `{s}`"))?
    };
    if !v.is_finite() {
        return Err(format!("value `{s}` is not finite"));
    }
    Ok(v)
}

/// Compact deterministic float tag for run names: `1.5` -> `1.5`,
/// `2.0` -> `2`.
fn tag(v: f64) -> String {
    let s = format!("{v}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Parse a configuration document into a validated plan.
pub fn parse_config(text: &str) -> Result<PlanSpec, ConfigError> {
    let doc = Doc::parse(text)?;
    let kind = doc.string_or("kind", "simulate");
    let name = doc.string_or("name", &kind);

    let plan = match kind.as_str() {
        "simulate" => PlanKind::Simulate(parse_simulate(&doc)?),
        "ode-scan" => PlanKind::OdeScan(parse_ode_scan(&doc)?),
        "estimates" => PlanKind::Estimates(parse_estimates(&doc)?),
        "testfn" => PlanKind::TestFn(parse_testfn(&doc)?),
        other => {
            let line = doc.get("kind").map(|e| e.line).unwrap_or(0);
            return Err(ConfigError::BadValue {
                key: "kind".into(),
                line,
                msg: format!("`{other}` is not one of simulate, ode-scan, estimates, testfn"),
            });
        }
    };
    doc.check_all_used()?;
    Ok(PlanSpec { name, kind: plan })
}

fn parse_simulate(doc: &Doc) -> Result<Vec<SimulateRun>, ConfigError> {
    let n = doc.u32_req("n")?;
    let r0 = doc.f64_or("r0", if n == 1 { 0.0 } else { 1.0 })?;
    let ps = doc.list("p")?.ok_or(ConfigError::MissingKey { key: "p" })?;
    let epss = doc.list("eps")?.unwrap_or_else(|| vec![1.0]);
    let support_radius = doc.f64_req("R")?;
    let h = doc.f64_or("h", 5e-3)?;
    let dt = doc.f64_or("dt", 1e-3)?;
    let dt_out = doc.f64_or("dt_out", 0.05)?;
    let t_end = doc.f64_req("t_end")?;
    let blowup_threshold = doc.f64_or("blowup_threshold", 1e10)?;
    let dt_min = doc.f64_or("dt_min", 1e-10)?;
    let profile = doc.string_or("profile", "bump");
    if profile != "bump" {
        let line = doc.get("profile").map(|e| e.line).unwrap_or(0);
        return Err(ConfigError::BadValue {
            key: "profile".into(),
            line,
            msg: format!("`{profile}` is not a known profile (available: bump)"),
        });
    }
    let center = doc.f64_or("center", 0.5 * (r0 + support_radius))?;
    let width = doc.f64_or("width", 0.5 * (support_radius - r0))?;

    for &p in &ps {
        if !(p > 1.0) {
            return Err(ConfigError::Invariant {
                msg: format!("p must exceed 1, got {p}"),
            });
        }
    }
    for &eps in &epss {
        if !(eps > 0.0) {
            return Err(ConfigError::Invariant {
                msg: format!("eps must be positive, got {eps}"),
            });
        }
    }

    let mut runs = Vec::new();
    for &p in &ps {
        for &eps in &epss {
            let name = format!("n{}_p{}_eps{}", n, tag(p), tag(eps));
            if runs.iter().any(|r: &SimulateRun| r.name == name) {
                return Err(ConfigError::DuplicateRun { name });
            }
            runs.push(SimulateRun {
                name,
                n,
                r0,
                p,
                eps,
                support_radius,
                center,
                width,
                h,
                dt,
                dt_out,
                t_end,
                blowup_threshold,
                dt_min,
            });
        }
    }
    Ok(runs)
}

fn parse_ode_scan(doc: &Doc) -> Result<OdeScanPlan, ConfigError> {
    let variant = doc.string_or("variant", "plain");
    let plan = OdeScanPlan {
        a: doc.list("a")?.unwrap_or_else(|| vec![1.0]),
        q: doc.list("q")?.unwrap_or_else(|| vec![0.0]),
        p: doc.list("p")?.ok_or(ConfigError::MissingKey { key: "p" })?,
        k: doc.f64_or("k", 1.0)?,
        delta: doc.f64_or("delta", 1.0)?,
        shift: doc.f64_or("R", 1.0)?,
        horizon: doc.f64_or("horizon", 1e6)?,
        k0: doc.list("k0")?.unwrap_or_default(),
        k1: doc.f64_or("k1", 1.0)?,
        t0: doc.f64_or("t0", 10.0)?,
        variant,
    };
    match plan.variant.as_str() {
        "plain" | "log-subcritical" => {}
        "log-critical" => {
            if plan.k0.is_empty() {
                return Err(ConfigError::MissingKey { key: "k0" });
            }
            if plan.a.len() != 1 || plan.q.len() != 1 || plan.p.len() != 1 {
                return Err(ConfigError::Invariant {
                    msg: "log-critical scans take scalar a, q, p and a k0 list".into(),
                });
            }
        }
        other => {
            let line = doc.get("variant").map(|e| e.line).unwrap_or(0);
            return Err(ConfigError::BadValue {
                key: "variant".into(),
                line,
                msg: format!("`{other}` is not one of plain, log-subcritical, log-critical"),
            });
        }
    }
    for &p in &plan.p {
        if !(p > 1.0) {
            return Err(ConfigError::Invariant {
                msg: format!("p must exceed 1, got {p}"),
            });
        }
    }
    Ok(plan)
}

fn parse_estimates(doc: &Doc) -> Result<EstimatesPlan, ConfigError> {
    let n = doc.u32_req("n")?;
    let p = doc.f64_req("p")?;
    if !(p > 1.0) {
        return Err(ConfigError::Invariant {
            msg: format!("p must exceed 1, got {p}"),
        });
    }
    let samples = doc.f64_or("samples", 25.0)? as usize;
    Ok(EstimatesPlan {
        n,
        p,
        support_radius: doc.f64_or("R", 2.0)?,
        h: doc.f64_or("h", 2e-3)?,
        t_min: doc.f64_or("t_min", 10.0)?,
        t_max: doc.f64_or("t_max", 100.0)?,
        samples,
        r1: doc.f64_or("r1", 10.0)?,
    })
}

fn parse_testfn(doc: &Doc) -> Result<TestFnPlan, ConfigError> {
    let n = doc.u32_req("n")?;
    let r0 = doc.f64_or("r0", if n == 1 { 0.0 } else { 1.0 })?;
    Ok(TestFnPlan {
        n,
        r0,
        rmax: doc.f64_or("rmax", r0 + 9.0)?,
        h: doc.f64_or("h", 1e-3)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simulate_config() {
        let plan = parse_config("n = 3\np = 2\neps = 1\nR = 3\nt_end = 10\n").unwrap();
        match plan.kind {
            PlanKind::Simulate(runs) => {
                assert_eq!(runs.len(), 1);
                assert_eq!(runs[0].name, "n3_p2_eps1");
                assert_eq!(runs[0].r0, 1.0);
                assert_eq!(runs[0].center, 2.0);
            }
            _ => panic!("expected a simulate plan"),
        }
    }

    #[test]
    fn sweep_expands_cartesian() {
        let plan = parse_config(
            "kind = simulate\nn = 3\np = 1.5, 2.0, 2.3\neps = 0.5, 1, 2\nR = 3\nt_end = 5\n",
        )
        .unwrap();
        match plan.kind {
            PlanKind::Simulate(runs) => {
                assert_eq!(runs.len(), 9);
                assert_eq!(runs[0].name, "n3_p1.5_eps0.5");
                assert_eq!(runs[8].name, "n3_p2.3_eps2");
            }
            _ => panic!(),
        }
    }

    #[test]
    fn rejects_p_below_one() {
        let err = parse_config("n = 3\np = 0.5\neps = 1\nR = 3\nt_end = 10\n").unwrap_err();
        assert!(err.to_string().contains("p must exceed 1"), "{err}");
    }

    #[test]
    fn rejects_unknown_key() {
        let err = parse_config("n = 3\np = 2\neps = 1\nR = 3\nt_end = 10\nh_totally_wrong = 1\n")
            .unwrap_err();
        match err {
            ConfigError::UnknownKey { key, line } => {
                assert_eq!(key, "h_totally_wrong");
                assert_eq!(line, 6);
            }
            other => panic!("expected UnknownKey, got {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_run_names() {
        let err = parse_config("n = 3\np = 2, 2.0\neps = 1\nR = 3\nt_end = 10\n").unwrap_err();
        assert!(matches!(err, ConfigError::DuplicateRun { .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# a plan\n\nn = 3  # dimension\np = 2\neps = 1\nR = 3\nt_end = 1\n";
        assert!(parse_config(text).is_ok());
    }

    #[test]
    fn ode_scan_and_estimates_kinds() {
        let plan = parse_config(
            "kind = ode-scan\na = 1, 2\nq = 0, 1\np = 1.5, 2\nk = 1\ndelta = 1\nR = 1\nhorizon = 1e6\n",
        )
        .unwrap();
        assert!(matches!(plan.kind, PlanKind::OdeScan(_)));
        let plan = parse_config("kind = estimates\nn = 2\np = pc2\n").unwrap();
        match plan.kind {
            PlanKind::Estimates(e) => assert!((e.p - 3.561_552_812_808_830_3).abs() < 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn log_critical_requires_k0_grid() {
        let err = parse_config("kind = ode-scan\nvariant = log-critical\na = 1\nq = 4\np = 3\n")
            .unwrap_err();
        assert!(matches!(err, ConfigError::MissingKey { key: "k0" }));
    }
}
