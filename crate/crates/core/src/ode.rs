//! Sideris-type comparison ODEs and blow-up detection.
//!
//! The equality case of the comparison inequality is integrated:
//! `F'' = k w(t) F^p` with
//!
//! * plain variant: `w(t) = (t+R)^{-q}`,
//! * logarithmic variants: `w(t) = [ln(t+R)]^{-q/2} (t+R)^{-q}`.
//!
//! Blow-up of the equality case exhibits the comparison mechanism: it is
//! the minimal solution of the inequality class for the same data. The
//! growth condition `(p-1) a > q - 2` separates blowing-up parameters
//! (supercritical) from the borderline `(p-1) a = q - 2` (critical, where
//! the constant in the lower bound decides) and the subcritical rest.
//!
//! Blow-up is declared once `F` exceeds a threshold and the extrapolated
//! blow-up time, from the local asymptotic `F ~ c (T-t)^{-2/(p-1)}` (a
//! straight line in `F^{-(p-1)/2}`), has stabilized to relative 1e-6 over
//! the last three estimates.

use std::error::Error;
use std::fmt;

use crate::fit::root_extrapolation;
use crate::ivp::{Control, DormandPrince54, IvpOutcome};

/// Weight variant of the comparison ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeVariant {
    Plain,
    LogSubcritical,
    LogCritical,
}

/// Relative tolerance for deciding `(p-1) a = q - 2` exactly.
pub const CRITICALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    Supercritical,
    Critical,
    Subcritical,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Criticality::Supercritical => "supercritical",
            Criticality::Critical => "critical",
            Criticality::Subcritical => "subcritical",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    InvalidSpec(String),
    /// Initial data below the envelope `F(t0) >= delta (t0+R)^a`.
    DataBelowEnvelope {
        f0: f64,
        envelope: f64,
    },
    NegativeInitialSlope(f64),
    /// Logarithmic weights need `ln(t+R) > 0` on the whole run.
    LogWeightDomain {
        t0: f64,
        shift: f64,
    },
}

impl fmt::Display for OdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdeError::InvalidSpec(msg) => write!(f, "invalid ODE spec: {msg}"),
            OdeError::DataBelowEnvelope { f0, envelope } => {
                write!(f, "initial value {f0} below the envelope {envelope}")
            }
            OdeError::NegativeInitialSlope(v) => {
                write!(f, "initial slope must be nonnegative, got {v}")
            }
            OdeError::LogWeightDomain { t0, shift } => write!(
                f,
                "log weight needs t + R > 1 on the run, got t0 = {t0}, R = {shift}"
            ),
        }
    }
}

impl Error for OdeError {}

/// Parameters of the comparison ODE and its lower-bound envelope
/// `F(t) >= delta (t+R)^a` (or `K0 (t+R)^a` from `t >= T0` in the critical
/// case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeBlowupSpec {
    pub p: f64,
    pub a: f64,
    pub q: f64,
    pub k: f64,
    pub delta: f64,
    pub shift: f64,
    pub variant: OdeVariant,
    /// Critical-case constants; unused by the other variants.
    pub k0: f64,
    pub k1: f64,
    pub t0: f64,
}

impl OdeBlowupSpec {
    pub fn plain(p: f64, a: f64, q: f64, k: f64, delta: f64, shift: f64) -> Result<Self, OdeError> {
        let spec = OdeBlowupSpec {
            p,
            a,
            q,
            k,
            delta,
            shift,
            variant: OdeVariant::Plain,
            k0: 0.0,
            k1: 0.0,
            t0: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn log_subcritical(
        p: f64,
        a: f64,
        q: f64,
        k: f64,
        delta: f64,
        shift: f64,
    ) -> Result<Self, OdeError> {
        let spec = OdeBlowupSpec {
            variant: OdeVariant::LogSubcritical,
            ..OdeBlowupSpec::plain(p, a, q, k, delta, shift)?
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn log_critical(
        p: f64,
        a: f64,
        q: f64,
        k0: f64,
        k1: f64,
        t0: f64,
        shift: f64,
    ) -> Result<Self, OdeError> {
        let spec = OdeBlowupSpec {
            p,
            a,
            q,
            k: k1,
            delta: k0,
            shift,
            variant: OdeVariant::LogCritical,
            k0,
            k1,
            t0,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), OdeError> {
        if !(self.p > 1.0) {
            return Err(OdeError::InvalidSpec(format!(
                "p must exceed 1, got {}",
                self.p
            )));
        }
        if !(self.a >= 1.0) {
            return Err(OdeError::InvalidSpec(format!(
                "a must be >= 1, got {}",
                self.a
            )));
        }
        if !(self.k > 0.0) {
            return Err(OdeError::InvalidSpec(format!(
                "k must be positive, got {}",
                self.k
            )));
        }
        if !(self.delta > 0.0) {
            return Err(OdeError::InvalidSpec(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.shift > 0.0) {
            return Err(OdeError::InvalidSpec(format!(
                "R must be positive, got {}",
                self.shift
            )));
        }
        match self.variant {
            OdeVariant::Plain => {}
            OdeVariant::LogSubcritical => {
                if self.shift <= 1.0 {
                    return Err(OdeError::LogWeightDomain {
                        t0: 0.0,
                        shift: self.shift,
                    });
                }
            }
            OdeVariant::LogCritical => {
                if !(self.k0 > 0.0 && self.k1 > 0.0 && self.t0 > 0.0) {
                    return Err(OdeError::InvalidSpec(
                        "log-critical case needs K0, K1, T0 > 0".into(),
                    ));
                }
                if self.t0 + self.shift <= 1.0 {
                    return Err(OdeError::LogWeightDomain {
                        t0: self.t0,
                        shift: self.shift,
                    });
                }
                let gap = (self.p - 1.0) * self.a - (self.q - 2.0);
                let scale = ((self.p - 1.0) * self.a).abs().max((self.q - 2.0).abs());
                if gap.abs() > CRITICALITY_TOL * scale.max(1.0) {
                    return Err(OdeError::InvalidSpec(format!(
                        "log-critical case needs (p-1)a = q-2 exactly, gap {gap:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sign of `(p-1) a - (q - 2)` with exact-zero detection at relative
    /// tolerance 1e-12.
    pub fn sideris_condition(&self) -> Criticality {
        classify(self.p, self.a, self.q)
    }

    fn weight(&self, t: f64) -> f64 {
        let s = t + self.shift;
        match self.variant {
            OdeVariant::Plain => s.powf(-self.q),
            OdeVariant::LogSubcritical | OdeVariant::LogCritical => {
                s.ln().powf(-0.5 * self.q) * s.powf(-self.q)
            }
        }
    }

    fn force_constant(&self) -> f64 {
        match self.variant {
            OdeVariant::LogCritical => self.k1,
            _ => self.k,
        }
    }
}

/// Growth-condition classification for arbitrary `(p, a, q)`.
pub fn classify(p: f64, a: f64, q: f64) -> Criticality {
    let gap = (p - 1.0) * a - (q - 2.0);
    let scale = ((p - 1.0) * a).abs().max((q - 2.0).abs()).max(1.0);
    if gap.abs() <= CRITICALITY_TOL * scale {
        Criticality::Critical
    } else if gap > 0.0 {
        Criticality::Supercritical
    } else {
        Criticality::Subcritical
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    BlewUp,
    /// Horizon reached without crossing the blow-up threshold.
    HorizonReached,
    /// Step size underflowed without a threshold crossing; numerically
    /// inconclusive, distinct from no-blow-up.
    Inconclusive,
}

/// Result of one comparison-ODE integration (also reused by the PDE
/// solver for its own blow-up reports).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupReport {
    pub blew_up: bool,
    pub outcome: RunOutcome,
    /// Last reliable time reached.
    pub t_end: f64,
    /// Extrapolated blow-up time, when blow-up was detected.
    pub t_blowup_est: Option<f64>,
    /// One-sigma half-width of the extrapolation, when available.
    pub t_blowup_err: Option<f64>,
    pub f_max: f64,
    pub steps: usize,
}

/// Detection thresholds: `F` must exceed `threshold` and the extrapolated
/// blow-up time must agree to `convergence_rtol` across the last three
/// estimates. Doubling the threshold moves the reported time by less than
/// the convergence tolerance.
#[derive(Debug, Clone, Copy)]
pub struct DetectionParams {
    pub threshold: f64,
    pub convergence_rtol: f64,
    pub rtol: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            threshold: 1e12,
            convergence_rtol: 1e-6,
            rtol: 1e-8,
        }
    }
}

impl DetectionParams {
    /// Tight profile used by `--tolerance-profile tight`.
    pub fn tight() -> Self {
        DetectionParams {
            threshold: 1e12,
            convergence_rtol: 1e-8,
            rtol: 1e-11,
        }
    }
}

/// Integrate the comparison ODE from `(f0, f0prime)` at the variant's
/// start time (0 for plain/log-subcritical, `T0` for log-critical) up to
/// `t_max`, detecting blow-up.
pub fn integrate(
    spec: &OdeBlowupSpec,
    f0: f64,
    f0prime: f64,
    t_max: f64,
    det: &DetectionParams,
) -> Result<BlowupReport, OdeError> {
    let t_start = match spec.variant {
        OdeVariant::LogCritical => spec.t0,
        _ => 0.0,
    };
    let envelope = match spec.variant {
        OdeVariant::LogCritical => spec.k0 * (t_start + spec.shift).powf(spec.a),
        _ => spec.delta * spec.shift.powf(spec.a),
    };
    if f0 < envelope * (1.0 - 1e-12) {
        return Err(OdeError::DataBelowEnvelope { f0, envelope });
    }
    if f0prime < 0.0 {
        return Err(OdeError::NegativeInitialSlope(f0prime));
    }

    let p = spec.p;
    let k = spec.force_constant();
    let rhs = move |t: f64, y: &[f64; 2]| -> [f64; 2] {
        let f = y[0].abs().min(1e120);
        [y[1], k * spec.weight(t) * f.powf(p)]
    };

    let solver = DormandPrince54 {
        rtol: det.rtol,
        atol: 1e-12,
        max_step: (t_max - t_start) / 16.0,
        min_step: 1e-15,
        initial_step: 1e-4,
    };

    // Recent (t, F^{-(p-1)/2}) samples for the straight-line extrapolation.
    // Sampling starts below the declaration threshold so that a run whose
    // final decades of F sit under the f64 time resolution still carries a
    // usable fit when the step floor is reached.
    let f_sample = det.threshold.min(1e8);
    let win = 8usize;
    let mut ts: Vec<f64> = Vec::with_capacity(win);
    let mut ys: Vec<f64> = Vec::with_capacity(win);
    let mut estimates: Vec<f64> = Vec::new();
    let mut f_max = f0;
    let mut converged: Option<(f64, f64)> = None;
    let mut last_fit: Option<(f64, f64)> = None;
    let mut trio_converged = false;

    let (t_fin, y_fin, outcome, steps) = solver
        .integrate(rhs, t_start, [f0, f0prime], t_max, |step| {
            let f = step.y1[0];
            f_max = f_max.max(f);
            if f > f_sample {
                if ts.len() == win {
                    ts.remove(0);
                    ys.remove(0);
                }
                ts.push(step.t1);
                ys.push(f.powf(-(p - 1.0) / 2.0));
                if ts.len() >= 4 {
                    if let Ok((root, se)) = root_extrapolation(&ts, &ys) {
                        last_fit = Some((root, se));
                        estimates.push(root);
                        let le = estimates.len();
                        if le >= 3 {
                            let trio = &estimates[le - 3..];
                            let lo = trio.iter().cloned().fold(f64::INFINITY, f64::min);
                            let hi = trio.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                            trio_converged = hi - lo <= det.convergence_rtol * hi.abs().max(1e-300);
                            if trio_converged && f > det.threshold {
                                converged = Some((root, se));
                                return Control::Stop;
                            }
                        }
                    }
                }
                // Hard stop before the state overflows even if the
                // extrapolation has not settled.
                if f > 1e100 {
                    if let Ok((root, se)) = root_extrapolation(&ts, &ys) {
                        converged = Some((root, se));
                    }
                    return Control::Stop;
                }
            }
            Control::Continue
        })
        .map_err(|e| OdeError::InvalidSpec(e.to_string()))?;

    let blowup_report = |est: Option<(f64, f64)>, steps: usize| BlowupReport {
        blew_up: true,
        outcome: RunOutcome::BlewUp,
        t_end: t_fin,
        t_blowup_est: Some(est.map(|(r, _)| r.max(t_fin)).unwrap_or(t_fin)),
        t_blowup_err: est.map(|(_, se)| se),
        f_max: f_max.max(y_fin[0]),
        steps,
    };

    let report = match (converged, outcome) {
        (Some(est), _) => blowup_report(Some(est), steps),
        (None, IvpOutcome::ReachedEnd) => BlowupReport {
            blew_up: false,
            outcome: RunOutcome::HorizonReached,
            t_end: t_fin,
            t_blowup_est: None,
            t_blowup_err: None,
            f_max,
            steps,
        },
        (None, IvpOutcome::StepUnderflow) => {
            // The step floor sits at the spacing of representable times,
            // so underflow means the solution now varies faster than f64
            // can resolve. With the threshold crossed, or with a settled
            // extrapolation whose root is at hand, that is blow-up; with
            // neither, the run is numerically inconclusive (distinct from
            // no-blow-up).
            if f_max > det.threshold || (trio_converged && f_max > f_sample) {
                blowup_report(last_fit, steps)
            } else {
                BlowupReport {
                    blew_up: false,
                    outcome: RunOutcome::Inconclusive,
                    t_end: t_fin,
                    t_blowup_est: None,
                    t_blowup_err: None,
                    f_max: f_max.max(y_fin[0]),
                    steps,
                }
            }
        }
        (None, IvpOutcome::Stopped) => unreachable!("stop implies a converged estimate"),
    };
    Ok(report)
}

/// Integrate from the envelope start `F = delta R^a`, `F' = a delta
/// R^{a-1}` (the derivative of the lower-bound envelope at t = 0).
pub fn integrate_from_envelope(
    spec: &OdeBlowupSpec,
    t_max: f64,
    det: &DetectionParams,
) -> Result<BlowupReport, OdeError> {
    let f0 = spec.delta * spec.shift.powf(spec.a);
    let f0p = spec.a * spec.delta * spec.shift.powf(spec.a - 1.0);
    integrate(spec, f0, f0p, t_max, det)
}

/// One cell of a parameter-space classification scan.
#[derive(Debug, Clone)]
pub struct ClassifiedCell {
    pub a: f64,
    pub q: f64,
    pub p: f64,
    pub class: Criticality,
    pub report: Result<BlowupReport, OdeError>,
}

/// Classify an `(a, q, p)` grid: integrate the equality case (plain or
/// log-subcritical weight) from the envelope start in every cell and
/// record the outcome, ordered by grid index (a outermost, p innermost).
pub fn classify_grid(
    a_values: &[f64],
    q_values: &[f64],
    p_values: &[f64],
    k: f64,
    delta: f64,
    shift: f64,
    horizon: f64,
    variant: OdeVariant,
    det: &DetectionParams,
) -> Vec<ClassifiedCell> {
    let mut cells = Vec::with_capacity(a_values.len() * q_values.len() * p_values.len());
    for &a in a_values {
        for &q in q_values {
            for &p in p_values {
                let class = classify(p, a, q);
                let spec = match variant {
                    OdeVariant::LogSubcritical => {
                        OdeBlowupSpec::log_subcritical(p, a, q, k, delta, shift)
                    }
                    _ => OdeBlowupSpec::plain(p, a, q, k, delta, shift),
                };
                let report = spec.and_then(|spec| integrate_from_envelope(&spec, horizon, det));
                cells.push(ClassifiedCell {
                    a,
                    q,
                    p,
                    class,
                    report,
                });
            }
        }
    }
    cells
}

/// Scan the critical-case constant `K0`: for each value, integrate from
/// `F(T0) = K0 (T0+R)^a` with the envelope slope, and report. The smallest
/// blowing-up `K0` is the empirical threshold.
pub fn critical_threshold_scan(
    spec: &OdeBlowupSpec,
    k0_grid: &[f64],
    t_max: f64,
    det: &DetectionParams,
) -> Result<Vec<(f64, BlowupReport)>, OdeError> {
    if spec.variant != OdeVariant::LogCritical {
        return Err(OdeError::InvalidSpec(
            "threshold scan needs the log-critical variant".into(),
        ));
    }
    for w in k0_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(OdeError::InvalidSpec("K0 grid must increase".into()));
        }
    }
    let mut out = Vec::with_capacity(k0_grid.len());
    for &k0 in k0_grid {
        let spec_k =
            OdeBlowupSpec::log_critical(spec.p, spec.a, spec.q, k0, spec.k1, spec.t0, spec.shift)?;
        let s = spec_k.t0 + spec_k.shift;
        let f0 = k0 * s.powf(spec_k.a);
        let f0p = spec_k.a * k0 * s.powf(spec_k.a - 1.0);
        let report = integrate(&spec_k, f0, f0p, t_max, det)?;
        out.push((k0, report));
    }
    Ok(out)
}

/// Index of the smallest blowing-up `K0` in a scan, if any.
pub fn empirical_threshold(scan: &[(f64, BlowupReport)]) -> Option<usize> {
    scan.iter().position(|(_, r)| r.blew_up)
}
