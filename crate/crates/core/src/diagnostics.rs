//! Proof-tracking functionals on simulation output.
//!
//! `F0(t) = int u phi0 dx` and `F1(t) = int u psi1 dx` drive the blow-up
//! argument: `F0'' = int |u|^p phi0 dx` (the harmonic weight kills both
//! Laplacian terms), `F1` stays above an explicit positive bound, and
//! Hoelder's inequality turns the pair into a Sideris-type differential
//! inequality for `F0` with dimension-dependent weight and envelope.
//!
//! The integrals are taken over the whole grid: under the support bound
//! they coincide with the truncated integrals the estimates use, and the
//! full-grid versions are the ones that satisfy the differential identity
//! discretely.

use std::error::Error;
use std::fmt;

use crate::fit::{loglog_fit, root_extrapolation};
use crate::grid::radial_quadrature;
use crate::problem::RadialProblem;
use crate::solver::SolutionState;
use crate::testfn::TestFunctionSet;

#[derive(Debug, Clone, PartialEq)]
pub enum DiagError {
    TooFewRows { needed: usize, got: usize },
    NonUniformCadence { at: usize },
    NonPositiveF0 { t: f64 },
    NonMonotoneTail,
    EmptyWindow,
}

impl fmt::Display for DiagError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagError::TooFewRows { needed, got } => {
                write!(f, "need at least {needed} trace rows, got {got}")
            }
            DiagError::NonUniformCadence { at } => {
                write!(f, "output cadence is not uniform at row {at}")
            }
            DiagError::NonPositiveF0 { t } => {
                write!(f, "window contains F0 <= 0 at t = {t}")
            }
            DiagError::NonMonotoneTail => {
                write!(f, "sup norm is not increasing over the final rows")
            }
            DiagError::EmptyWindow => write!(f, "selected window is empty"),
        }
    }
}

impl Error for DiagError {}

/// One output row of probe functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub f0: f64,
    pub f1: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    /// `int |u|^p phi0 dx`.
    pub nonlin_weighted: f64,
}

/// Time series of the probe functionals plus run audits.
#[derive(Debug, Clone, Default)]
pub struct FunctionalTrace {
    pub times: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
    pub sup_norm: Vec<f64>,
    pub l2_norm: Vec<f64>,
    pub nonlin_weighted: Vec<f64>,
    pub energy: Vec<f64>,
    /// Max of `|u|, |v|` beyond `t + R + 2h`, relative to the sup norm.
    pub support_ratio: Vec<f64>,
}

impl FunctionalTrace {
    pub fn push(&mut self, t: f64, row: TraceRow, energy: f64, support_ratio: f64) {
        self.times.push(t);
        self.f0.push(row.f0);
        self.f1.push(row.f1);
        self.sup_norm.push(row.sup_norm);
        self.l2_norm.push(row.l2_norm);
        self.nonlin_weighted.push(row.nonlin_weighted);
        self.energy.push(energy);
        self.support_ratio.push(support_ratio);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Rows with `t_lo <= t <= t_hi`.
    pub fn window(&self, t_lo: f64, t_hi: f64) -> FunctionalTrace {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.times[i] >= t_lo && self.times[i] <= t_hi)
            .collect();
        let take = |v: &Vec<f64>| keep.iter().map(|&i| v[i]).collect();
        FunctionalTrace {
            times: take(&self.times),
            f0: take(&self.f0),
            f1: take(&self.f1),
            sup_norm: take(&self.sup_norm),
            l2_norm: take(&self.l2_norm),
            nonlin_weighted: take(&self.nonlin_weighted),
            energy: take(&self.energy),
            support_ratio: take(&self.support_ratio),
        }
    }
}

/// Window rule for the "t sufficiently large" estimates: the fit runs over
/// the second half of the pre-spike part of the trace, where the spike
/// onset is the first time the sup norm exceeds `sup_growth_cut` times its
/// initial value. Both knobs are echoed into reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRule {
    pub sup_growth_cut: f64,
    pub fraction: f64,
}

impl Default for WindowRule {
    fn default() -> Self {
        WindowRule {
            sup_growth_cut: 10.0,
            fraction: 0.5,
        }
    }
}

impl WindowRule {
    /// `(t_lo, t_hi)` of the fitting window for a trace.
    pub fn select(&self, trace: &FunctionalTrace) -> Result<(f64, f64), DiagError> {
        if trace.len() < 3 {
            return Err(DiagError::TooFewRows {
                needed: 3,
                got: trace.len(),
            });
        }
        let s0 = trace.sup_norm[0].max(f64::MIN_POSITIVE);
        let t_hi = trace
            .times
            .iter()
            .zip(&trace.sup_norm)
            .find(|(_, &s)| s > self.sup_growth_cut * s0)
            .map(|(&t, _)| t)
            .unwrap_or(*trace.times.last().unwrap());
        let t_lo = trace.times[0] + (t_hi - trace.times[0]) * (1.0 - self.fraction);
        Ok((t_lo, t_hi))
    }
}

/// Project a state onto the probe functionals.
pub fn compute_functionals(state: &SolutionState, tf: &TestFunctionSet, p: f64) -> TraceRow {
    let grid = &tf.grid;
    let dim = &tf.dim;
    debug_assert_eq!(state.u.len(), grid.len());
    let m = grid.len();

    let mut u_phi0 = vec![0.0; m];
    let mut u_psi1 = vec![0.0; m];
    let mut u_p_phi0 = vec![0.0; m];
    let mut u_sq = vec![0.0; m];
    let decay = -state.t;
    for i in 0..m {
        let u = state.u[i];
        u_phi0[i] = u * tf.phi0[i];
        // psi1 from the log samples keeps the product finite even where
        // phi1 alone would overflow; u = 0 rows are skipped outright.
        u_psi1[i] = if u == 0.0 {
            0.0
        } else {
            u * (tf.ln_phi1[i] + decay).exp()
        };
        u_p_phi0[i] = u.abs().powf(p) * tf.phi0[i];
        u_sq[i] = u * u;
    }
    let f0 = radial_quadrature(grid, &u_phi0, dim).expect("grid-consistent samples");
    let f1 = radial_quadrature(grid, &u_psi1, dim).expect("grid-consistent samples");
    let nonlin = radial_quadrature(grid, &u_p_phi0, dim).expect("grid-consistent samples");
    let l2 = radial_quadrature(grid, &u_sq, dim)
        .expect("grid-consistent samples")
        .max(0.0)
        .sqrt();
    TraceRow {
        f0,
        f1,
        sup_norm: state.sup_norm(),
        l2_norm: l2,
        nonlin_weighted: nonlin,
    }
}

/// Weighted data integrals `int phi1 u_i dx` of the (unscaled) profiles.
pub fn data_integrals(problem: &RadialProblem, tf: &TestFunctionSet) -> (f64, f64) {
    let grid = &tf.grid;
    let f0: Vec<f64> = (0..grid.len())
        .map(|i| tf.phi1[i] * problem.u0.eval(grid.node(i)))
        .collect();
    let f1: Vec<f64> = (0..grid.len())
        .map(|i| tf.phi1[i] * problem.u1.eval(grid.node(i)))
        .collect();
    (
        radial_quadrature(grid, &f0, &tf.dim).expect("grid-consistent samples"),
        radial_quadrature(grid, &f1, &tf.dim).expect("grid-consistent samples"),
    )
}

/// Explicit lower bound on `F1(t)`:
/// `(eps/3 (1 - e^{-3t/2}) + eps e^{-3t/2}) int phi1 u0
///  + (2 eps/3)(1 - e^{-3t/2}) int phi1 u1`.
pub fn f1_lower_bound(problem: &RadialProblem, tf: &TestFunctionSet, t: f64) -> f64 {
    assert!(t >= 0.0);
    let (i0, i1) = data_integrals(problem, tf);
    f1_lower_bound_from(problem.eps, i0, i1, t)
}

pub fn f1_lower_bound_from(eps: f64, int_phi1_u0: f64, int_phi1_u1: f64, t: f64) -> f64 {
    let e = (-1.5 * t).exp();
    eps * ((1.0 - e) / 3.0 + e) * int_phi1_u0 + 2.0 * eps / 3.0 * (1.0 - e) * int_phi1_u1
}

/// Certificate of the `F1` lower bound over a trace: the uniform constant
/// `c0 = (1/3) int phi1 u0` (valid because the `u0` coefficient never
/// drops below `eps/3` and the `u1` coefficient is nonnegative) together
/// with the observed margin `min_t (F1 - bound)`. Each row's margin is
/// compared against that row's own quadrature scale,
/// `1e-6 sup|u| e^{-t} int phi1`, with the integral over the supported
/// part of the domain.
#[derive(Debug, Clone, Copy)]
pub struct F1BoundCertificate {
    pub c0: f64,
    pub int_phi1_u0: f64,
    pub int_phi1_u1: f64,
    pub margin: f64,
    /// Time at which the margin is attained.
    pub argmin_t: f64,
    /// Quadrature tolerance at the margin-attaining row.
    pub tolerance: f64,
    /// Per-row check: every margin at least minus that row's tolerance.
    pub holds: bool,
}

pub fn f1_bound_certificate(
    problem: &RadialProblem,
    tf: &TestFunctionSet,
    trace: &FunctionalTrace,
) -> Result<F1BoundCertificate, DiagError> {
    if trace.is_empty() {
        return Err(DiagError::TooFewRows { needed: 1, got: 0 });
    }
    let (i0, i1) = data_integrals(problem, tf);
    let mut margin = f64::INFINITY;
    let mut argmin_t = trace.times[0];
    let mut tolerance = 0.0f64;
    let mut holds = true;
    for (i, &t) in trace.times.iter().enumerate() {
        let bound = f1_lower_bound_from(problem.eps, i0, i1, t);
        let m = trace.f1[i] - bound;
        let rho = problem.support_radius_at(t).min(tf.grid.rmax());
        let phi1_mass = crate::grid::radial_quadrature_to(&tf.grid, &tf.phi1, &tf.dim, rho)
            .unwrap_or(f64::INFINITY);
        let tol = 1e-6 * trace.sup_norm[i].max(problem.eps) * (-t).exp() * phi1_mass;
        if m < margin {
            margin = m;
            argmin_t = t;
            tolerance = tol;
        }
        holds &= m >= -tol;
    }
    Ok(F1BoundCertificate {
        c0: i0 / 3.0,
        int_phi1_u0: i0,
        int_phi1_u1: i1,
        margin,
        argmin_t,
        tolerance,
        holds,
    })
}

/// Residual of the identity `F0'' = int |u|^p phi0 dx`: central second
/// differences of `F0` on the uniform output cadence against the recorded
/// nonlinear integral. Returns the per-row residuals and their max
/// relative to the largest `|int |u|^p phi0|` in the trace.
pub fn check_f0_identity(trace: &FunctionalTrace) -> Result<(Vec<f64>, f64), DiagError> {
    let n = trace.len();
    if n < 5 {
        return Err(DiagError::TooFewRows { needed: 5, got: n });
    }
    let dt = trace.times[1] - trace.times[0];
    for i in 1..n {
        let step = trace.times[i] - trace.times[i - 1];
        if (step - dt).abs() > 1e-9 * dt.max(1e-300) {
            return Err(DiagError::NonUniformCadence { at: i });
        }
    }
    let mut residuals = Vec::with_capacity(n - 2);
    let mut max_res = 0.0f64;
    let mut max_nl = 0.0f64;
    for i in 1..n - 1 {
        let second = (trace.f0[i - 1] - 2.0 * trace.f0[i] + trace.f0[i + 1]) / (dt * dt);
        let r = second - trace.nonlin_weighted[i];
        residuals.push(r);
        max_res = max_res.max(r.abs());
        max_nl = max_nl.max(trace.nonlin_weighted[i].abs());
    }
    let rel = if max_nl > 0.0 {
        max_res / max_nl
    } else {
        max_res
    };
    Ok((residuals, rel))
}

/// Dimension-dependent weight `w(t)` of the differential inequality
/// `F0'' >= k w(t) |F0|^p`.
pub fn inequality_weight(n: u32, p: f64, t: f64, support_radius: f64) -> f64 {
    let s = t + support_radius;
    match n {
        1 => s.powf(-2.0 * (p - 1.0)),
        2 => s.ln().powf(-(p - 1.0)) * s.powf(-2.0 * (p - 1.0)),
        _ => s.powf(-(n as f64) * (p - 1.0)),
    }
}

/// Explicit constant `k` in the inequality, from the proof's chain:
/// `[Vol(B^n)]^{-(p-1)}` for n >= 3; `2^{p-1}` for n = 1 (from
/// `int_0^{t+R} x dx = (t+R)^2/2` with the linear weight); `pi^{-(p-1)}`
/// for n = 2 with the log weight (valid once the obstacle radius is >= 1
/// so that `ln(r/r0) <= ln r`).
pub fn theoretical_k(n: u32, p: f64, dim_volume: f64) -> f64 {
    match n {
        1 => 2.0f64.powf(p - 1.0),
        2 => std::f64::consts::PI.powf(-(p - 1.0)),
        _ => dim_volume.powf(-(p - 1.0)),
    }
}

/// Measured inequality constants over a trace window: the per-row ratio
/// `nonlin_weighted / (w(t) F0^p)`, its minimum `k_fit`, and the count of
/// rows whose ratio falls below the supplied theoretical `k` beyond the
/// tolerance.
#[derive(Debug, Clone)]
pub struct InequalityCheck {
    pub k_fit: f64,
    pub violations: usize,
    pub ratios: Vec<f64>,
}

pub fn check_differential_inequality(
    trace: &FunctionalTrace,
    n: u32,
    p: f64,
    support_radius: f64,
    k_theory: f64,
    tol: f64,
) -> Result<InequalityCheck, DiagError> {
    if trace.is_empty() {
        return Err(DiagError::TooFewRows { needed: 1, got: 0 });
    }
    let mut ratios = Vec::with_capacity(trace.len());
    let mut k_fit = f64::INFINITY;
    let mut violations = 0usize;
    for (i, &t) in trace.times.iter().enumerate() {
        let f0 = trace.f0[i];
        if !(f0 > 0.0) {
            return Err(DiagError::NonPositiveF0 { t });
        }
        let w = inequality_weight(n, p, t, support_radius);
        let ratio = trace.nonlin_weighted[i] / (w * f0.powf(p));
        if ratio < k_fit {
            k_fit = ratio;
        }
        if ratio < k_theory * (1.0 - tol) {
            violations += 1;
        }
        ratios.push(ratio);
    }
    Ok(InequalityCheck {
        k_fit,
        violations,
        ratios,
    })
}

/// Target growth exponent `a` of the `F0` lower bound per dimension case:
/// `n+1-(n-1)p/2` for n >= 3, `2` for n = 1, `3 - p/2` for n = 2.
pub fn lower_bound_exponent(n: u32, p: f64) -> f64 {
    match n {
        1 => 2.0,
        2 => 3.0 - p / 2.0,
        _ => n as f64 + 1.0 - (n as f64 - 1.0) * p / 2.0,
    }
}

/// Log-log fit of `F0` against `t + R` over a window: returns
/// `(delta_fit, exponent_fit)` where `delta_fit = min F0 / (t+R)^a` with
/// the dimension-case target `a`.
pub fn check_f0_lower_bound(
    trace: &FunctionalTrace,
    n: u32,
    p: f64,
    support_radius: f64,
) -> Result<(f64, f64), DiagError> {
    if trace.len() < 4 {
        return Err(DiagError::TooFewRows {
            needed: 4,
            got: trace.len(),
        });
    }
    let a = lower_bound_exponent(n, p);
    let mut xs = Vec::with_capacity(trace.len());
    let mut ys = Vec::with_capacity(trace.len());
    let mut delta_fit = f64::INFINITY;
    for (i, &t) in trace.times.iter().enumerate() {
        let f0 = trace.f0[i];
        if !(f0 > 0.0) {
            return Err(DiagError::NonPositiveF0 { t });
        }
        let s = t + support_radius;
        xs.push(s);
        ys.push(f0);
        delta_fit = delta_fit.min(f0 / s.powf(a));
    }
    let (exponent_fit, _) = loglog_fit(&xs, &ys).map_err(|_| DiagError::EmptyWindow)?;
    Ok((delta_fit, exponent_fit))
}

/// Blow-up time extrapolated from the trace: straight-line fit of
/// `sup_norm^{-(p-1)/2}` over the final increasing rows, rooted at zero.
#[derive(Debug, Clone, Copy)]
pub struct BlowupEstimate {
    pub time: f64,
    pub half_width: f64,
    pub window_rows: usize,
}

pub fn extrapolate_blowup_time(
    trace: &FunctionalTrace,
    p: f64,
) -> Result<BlowupEstimate, DiagError> {
    let n = trace.len();
    if n < 8 {
        return Err(DiagError::TooFewRows { needed: 8, got: n });
    }
    // Longest strictly increasing suffix of the sup norm.
    let mut start = n - 1;
    while start > 0 && trace.sup_norm[start - 1] < trace.sup_norm[start] {
        start -= 1;
    }
    let rows = n - start;
    if rows < 8 {
        return Err(DiagError::NonMonotoneTail);
    }
    let take = rows.min(16);
    let lo = n - take;
    let xs: Vec<f64> = trace.times[lo..].to_vec();
    let ys: Vec<f64> = trace.sup_norm[lo..]
        .iter()
        .map(|&s| s.powf(-(p - 1.0) / 2.0))
        .collect();
    let (root, se) = root_extrapolation(&xs, &ys).map_err(|_| DiagError::NonMonotoneTail)?;
    Ok(BlowupEstimate {
        time: root,
        half_width: se,
        window_rows: take,
    })
}
