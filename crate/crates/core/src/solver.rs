//! Method-of-lines simulator for `u_tt - lap(u) - lap(u_t) = |u|^p` on a
//! radial exterior domain with homogeneous Dirichlet data.
//!
//! As the first-order system `u_t = v`, `v_t = lap(u) + lap(v) + |u|^p`,
//! one step of size `dt` treats both Laplacians with trapezoidal
//! (Crank-Nicolson) weights and the nonlinearity explicitly at the midpoint
//! predictor `u + (dt/2) v`:
//!
//! ```text
//! u+ = u + (dt/2)(v + v+)
//! v+ = v + (dt/2) L(u + u+) + (dt/2) L(v + v+) + dt N
//! ```
//!
//! Substituting `u+` gives a single tridiagonal solve per step,
//! `(I - alpha L) v+ = v + dt L u + alpha L v + dt N` with
//! `alpha = dt/2 + dt^2/4`. The matrix is strictly diagonally dominant for
//! any `dt > 0` (the flux-form Laplacian has a negative diagonal), so the
//! Thomas algorithm is stable.
//!
//! With the nonlinearity off, the scheme dissipates the discrete energy
//! `E = (1/2)<v, v> + (1/2)|grad u|^2` exactly:
//! `E+ - E = -(dt/4) |grad(v + v+)|^2 <= 0` by discrete summation by
//! parts, which is the scheme-level version of `dE/dt = -int |grad v|^2`.

use std::error::Error;
use std::fmt;

use crate::diagnostics::{self, FunctionalTrace};
use crate::grid::{Dimension, RadialGrid};
use crate::ode::{BlowupReport, RunOutcome};
use crate::problem::RadialProblem;
use crate::testfn::TestFunctionSet;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    GridTooSmall { rmax: f64, needed: f64 },
    GridMismatch,
    BadConfig(String),
    NonFinite { t: f64 },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::GridTooSmall { rmax, needed } => {
                write!(
                    f,
                    "grid ends at {rmax} but the horizon needs rmax >= {needed}"
                )
            }
            SolverError::GridMismatch => write!(f, "state and test functions use different grids"),
            SolverError::BadConfig(msg) => write!(f, "invalid solver config: {msg}"),
            SolverError::NonFinite { t } => write!(f, "solution became non-finite at t = {t}"),
        }
    }
}

impl Error for SolverError {}

/// Time-stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Base time step; the controller only shrinks below this near blow-up.
    pub dt: f64,
    /// Safety factor in (0, 1] applied to `dt`.
    pub cfl_safety: f64,
    /// Sup-norm cutoff that declares blow-up.
    pub blowup_threshold: f64,
    /// Smallest admissible step; reaching it under sustained growth also
    /// declares blow-up.
    pub dt_min: f64,
    /// Per-step sup-norm growth target; steps are shrunk to keep growth
    /// near this factor and rejected outright beyond `growth_reject`.
    pub growth_limit: f64,
    pub growth_reject: f64,
    /// Evaluate `|u|^p`; disabled for linear audits.
    pub nonlinearity: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            cfl_safety: 1.0,
            blowup_threshold: 1e10,
            dt_min: 1e-10,
            growth_limit: 1.05,
            growth_reject: 2.0,
            nonlinearity: true,
        }
    }
}

impl SolverConfig {
    fn validate(&self, initial_sup: f64) -> Result<(), SolverError> {
        if !(self.dt > 0.0) || !(self.dt_min > 0.0) {
            return Err(SolverError::BadConfig(format!(
                "dt = {}, dt_min = {} must be positive",
                self.dt, self.dt_min
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(SolverError::BadConfig(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if self.blowup_threshold <= initial_sup {
            return Err(SolverError::BadConfig(format!(
                "blow-up threshold {} must exceed the initial sup norm {}",
                self.blowup_threshold, initial_sup
            )));
        }
        Ok(())
    }
}

/// Time slice of the evolution: `u` and `v = u_t` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl SolutionState {
    pub fn sup_norm(&self) -> f64 {
        self.u.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }
}

/// Precomputed flux-form Laplacian stencil (see
/// [`crate::testfn::discrete_radial_laplacian`]); `lower/diag/upper` give
/// `L u_i = lower_i u_{i-1} + diag_i u_i + upper_i u_{i+1}` on interior
/// nodes.
struct Stencil {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Quadrature weight `omega_n r^{n-1} h` per node (trapezoid endpoints
    /// halved), for norms and the energy.
    node_weight: Vec<f64>,
    /// `omega_n rho_{i+1/2} h` per cell, for the gradient energy.
    flux_weight: Vec<f64>,
}

impl Stencil {
    fn build(grid: &RadialGrid, dim: &Dimension) -> Stencil {
        let m = grid.len();
        let h = grid.h();
        let nm1 = dim.n() as i32 - 1;
        let omega = dim.surface_weight();
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for i in 1..m - 1 {
            let r = grid.node(i);
            let rho_p = (r + 0.5 * h).powi(nm1);
            let rho_m = (r - 0.5 * h).powi(nm1);
            let w = r.powi(nm1) * h * h;
            lower[i] = rho_m / w;
            upper[i] = rho_p / w;
            diag[i] = -(rho_m + rho_p) / w;
        }
        let mut node_weight = vec![0.0; m];
        for i in 0..m {
            let scale = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
            node_weight[i] = scale * omega * grid.node(i).powi(nm1) * h;
        }
        let flux_weight = (0..m - 1)
            .map(|i| omega * (grid.node(i) + 0.5 * h).powi(nm1) * h)
            .collect();
        Stencil {
            lower,
            diag,
            upper,
            node_weight,
            flux_weight,
        }
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let m = u.len();
        out[0] = 0.0;
        out[m - 1] = 0.0;
        for i in 1..m - 1 {
            out[i] = self.lower[i] * u[i - 1] + self.diag[i] * u[i] + self.upper[i] * u[i + 1];
        }
    }
}

/// Discrete radial Laplacian of Dirichlet samples (zero at both boundary
/// nodes); thin wrapper kept as the module-level operation.
pub fn discrete_laplacian(grid: &RadialGrid, dim: &Dimension, u: &[f64]) -> Vec<f64> {
    crate::testfn::discrete_radial_laplacian(grid, dim, u)
}

/// Discrete energy `(1/2) <v, v> + (1/2) |grad u|^2` in the weighted inner
/// product the scheme dissipates.
pub fn discrete_energy(grid: &RadialGrid, dim: &Dimension, u: &[f64], v: &[f64]) -> f64 {
    let stencil = Stencil::build(grid, dim);
    energy_with(&stencil, grid, u, v)
}

fn energy_with(stencil: &Stencil, grid: &RadialGrid, u: &[f64], v: &[f64]) -> f64 {
    let h = grid.h();
    let mut kinetic = 0.0;
    for (i, &w) in stencil.node_weight.iter().enumerate() {
        kinetic += w * v[i] * v[i];
    }
    let mut grad = 0.0;
    for i in 0..grid.len() - 1 {
        let du = (u[i + 1] - u[i]) / h;
        grad += stencil.flux_weight[i] * du * du;
    }
    0.5 * (kinetic + grad)
}

/// Thomas solve of `(I - alpha L) x = rhs` on interior nodes; boundary
/// entries of `x` stay zero. `scratch` must hold `2 m` values.
fn solve_semi_implicit(
    stencil: &Stencil,
    alpha: f64,
    rhs: &[f64],
    x: &mut [f64],
    scratch: &mut [f64],
) {
    let m = rhs.len();
    let (c_prime, d_prime) = scratch.split_at_mut(m);
    // Interior system runs over i = 1..m-1.
    let b = |i: usize| 1.0 - alpha * stencil.diag[i];
    let a = |i: usize| -alpha * stencil.lower[i];
    let c = |i: usize| -alpha * stencil.upper[i];

    c_prime[1] = c(1) / b(1);
    d_prime[1] = rhs[1] / b(1);
    for i in 2..m - 1 {
        let denom = b(i) - a(i) * c_prime[i - 1];
        c_prime[i] = c(i) / denom;
        d_prime[i] = (rhs[i] - a(i) * d_prime[i - 1]) / denom;
    }
    x[0] = 0.0;
    x[m - 1] = 0.0;
    x[m - 2] = d_prime[m - 2];
    for i in (1..m - 2).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
}

/// Scratch buffers reused across steps.
struct Workspace {
    lu: Vec<f64>,
    lv: Vec<f64>,
    rhs: Vec<f64>,
    v_new: Vec<f64>,
    u_new: Vec<f64>,
    thomas: Vec<f64>,
}

impl Workspace {
    fn new(m: usize) -> Self {
        Workspace {
            lu: vec![0.0; m],
            lv: vec![0.0; m],
            rhs: vec![0.0; m],
            v_new: vec![0.0; m],
            u_new: vec![0.0; m],
            thomas: vec![0.0; 2 * m],
        }
    }
}

/// Advance one step of size `dt`; returns the new state. Boundary zeros
/// are preserved exactly.
pub fn step(
    state: &SolutionState,
    dt: f64,
    cfg: &SolverConfig,
    problem: &RadialProblem,
    grid: &RadialGrid,
) -> SolutionState {
    let stencil = Stencil::build(grid, &problem.dim);
    let mut ws = Workspace::new(grid.len());
    let mut out = state.clone();
    step_with(&mut out, dt, cfg, problem, &stencil, &mut ws);
    out
}

fn step_with(
    state: &mut SolutionState,
    dt: f64,
    cfg: &SolverConfig,
    problem: &RadialProblem,
    stencil: &Stencil,
    ws: &mut Workspace,
) {
    let m = state.u.len();
    let alpha = 0.5 * dt + 0.25 * dt * dt;
    stencil.apply(&state.u, &mut ws.lu);
    stencil.apply(&state.v, &mut ws.lv);

    let p = problem.p;
    ws.rhs[0] = 0.0;
    ws.rhs[m - 1] = 0.0;
    for i in 1..m - 1 {
        // Midpoint predictor keeps the explicit nonlinearity second order.
        let nl = if cfg.nonlinearity {
            let um = state.u[i] + 0.5 * dt * state.v[i];
            um.abs().powf(p)
        } else {
            0.0
        };
        ws.rhs[i] = state.v[i] + dt * ws.lu[i] + alpha * ws.lv[i] + dt * nl;
    }
    solve_semi_implicit(stencil, alpha, &ws.rhs, &mut ws.v_new, &mut ws.thomas);

    ws.u_new[0] = 0.0;
    ws.u_new[m - 1] = 0.0;
    for i in 1..m - 1 {
        ws.u_new[i] = state.u[i] + 0.5 * dt * (state.v[i] + ws.v_new[i]);
    }
    state.u.copy_from_slice(&ws.u_new);
    state.v.copy_from_slice(&ws.v_new);
    state.t += dt;
}

/// Probe configuration for [`run`]: which test functions to project on and
/// the fixed output cadence (independent of the internal step).
#[derive(Debug, Clone)]
pub struct Probes {
    pub tf: TestFunctionSet,
    pub dt_out: f64,
    /// Tolerance for the support audit: nodes beyond `t + R + 2h` must stay
    /// below `support_tol * sup|u|`.
    pub support_tol: f64,
}

impl Probes {
    pub fn new(tf: TestFunctionSet, dt_out: f64) -> Self {
        Probes {
            tf,
            dt_out,
            support_tol: 1e-10,
        }
    }
}

/// Initial state from the problem data.
pub fn initial_state(problem: &RadialProblem, grid: &RadialGrid) -> SolutionState {
    let m = grid.len();
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; m];
    for i in 1..m - 1 {
        let r = grid.node(i);
        u[i] = problem.eps * problem.u0.eval(r);
        v[i] = problem.eps * problem.u1.eval(r);
    }
    SolutionState { t: 0.0, u, v }
}

/// Run the simulation until `t_end`, the sup norm exceeds the blow-up
/// threshold, or the step collapses to `dt_min` under sustained growth
/// (the last two both mark blow-up). Functionals are recorded at every
/// output time; reaching the horizon without blow-up is a normal outcome.
pub fn run(
    problem: &RadialProblem,
    cfg: &SolverConfig,
    t_end: f64,
    probes: &Probes,
) -> Result<(FunctionalTrace, BlowupReport), SolverError> {
    let grid = &probes.tf.grid;
    let needed = problem.support_radius + t_end + 2.0 * grid.h();
    if grid.rmax() < needed - 1e-9 {
        return Err(SolverError::GridTooSmall {
            rmax: grid.rmax(),
            needed,
        });
    }
    if (grid.r0() - problem.dim.boundary_radius()).abs() > 1e-12 {
        return Err(SolverError::GridMismatch);
    }

    let mut state = initial_state(problem, grid);
    cfg.validate(state.sup_norm())?;

    let stencil = Stencil::build(grid, &problem.dim);
    let mut ws = Workspace::new(grid.len());
    let mut trace = FunctionalTrace::default();
    let dt_base = cfg.dt * cfg.cfl_safety;
    let mut dt = dt_base;
    let mut steps = 0usize;
    let mut sustained_floor = 0usize;
    let mut outcome = RunOutcome::HorizonReached;

    record_row(&mut trace, &state, problem, probes, &stencil, grid);
    let mut next_out = probes.dt_out;

    'time: while state.t < t_end - 1e-12 {
        let target = next_out.min(t_end);
        // Never step across an output time; cadence stays exact.
        let dt_step = dt
            .min(target - state.t)
            .max(cfg.dt_min.min(target - state.t));
        let sup_before = state.sup_norm();

        let mut trial = state.clone();
        step_with(&mut trial, dt_step, cfg, problem, &stencil, &mut ws);
        let sup_after = trial.sup_norm();
        if !sup_after.is_finite() {
            return Err(SolverError::NonFinite { t: state.t });
        }
        let growth = if sup_before > 0.0 {
            sup_after / sup_before
        } else {
            1.0
        };

        if growth > cfg.growth_reject && dt_step > cfg.dt_min {
            dt = (dt_step * 0.5).max(cfg.dt_min);
            continue 'time;
        }

        state = trial;
        steps += 1;

        if growth > cfg.growth_limit {
            if dt_step <= cfg.dt_min * 1.000_001 {
                sustained_floor += 1;
                if sustained_floor >= 3 {
                    outcome = RunOutcome::BlewUp;
                    record_row(&mut trace, &state, problem, probes, &stencil, grid);
                    break 'time;
                }
            } else {
                sustained_floor = 0;
            }
            dt = (dt_step * cfg.growth_limit / growth).max(cfg.dt_min);
        } else {
            sustained_floor = 0;
            dt = (dt * 1.1).min(dt_base);
        }

        if state.sup_norm() > cfg.blowup_threshold {
            outcome = RunOutcome::BlewUp;
            record_row(&mut trace, &state, problem, probes, &stencil, grid);
            break 'time;
        }

        if (state.t - next_out).abs() <= 1e-12 * next_out.max(1.0) {
            record_row(&mut trace, &state, problem, probes, &stencil, grid);
            next_out += probes.dt_out;
        }
    }

    let blew_up = outcome == RunOutcome::BlewUp;
    let (t_est, t_err) = if blew_up {
        match diagnostics::extrapolate_blowup_time(&trace, problem.p) {
            Ok(est) => (Some(est.time.max(state.t)), Some(est.half_width)),
            Err(_) => (Some(state.t), None),
        }
    } else {
        (None, None)
    };

    let report = BlowupReport {
        blew_up,
        outcome,
        t_end: state.t,
        t_blowup_est: t_est,
        t_blowup_err: t_err,
        f_max: state.sup_norm(),
        steps,
    };
    Ok((trace, report))
}

fn record_row(
    trace: &mut FunctionalTrace,
    state: &SolutionState,
    problem: &RadialProblem,
    probes: &Probes,
    stencil: &Stencil,
    grid: &RadialGrid,
) {
    // The final row of a terminated run may coincide with the last cadence
    // row; never record the same time twice.
    if let Some(&last) = trace.times.last() {
        if state.t <= last {
            return;
        }
    }
    let row = diagnostics::compute_functionals(state, &probes.tf, problem.p);
    let energy = energy_with(stencil, grid, &state.u, &state.v);
    let support_ratio = support_audit_ratio(state, problem, grid);
    trace.push(state.t, row, energy, support_ratio);
}

/// Largest `|u|` (relative to the sup norm) on nodes beyond the support
/// bound `t + R + 2h`.
pub fn support_audit_ratio(
    state: &SolutionState,
    problem: &RadialProblem,
    grid: &RadialGrid,
) -> f64 {
    let sup = state.sup_norm();
    if sup == 0.0 {
        return 0.0;
    }
    let bound = problem.support_radius_at(state.t) + 2.0 * grid.h();
    let start = grid.last_node_leq(bound) + 1;
    let mut worst = 0.0f64;
    for i in start..grid.len() {
        worst = worst.max(state.u[i].abs().max(state.v[i].abs()));
    }
    worst / sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dimension;
    use crate::problem::Profile;

    fn problem_3d(eps: f64, p: f64) -> (RadialProblem, RadialGrid) {
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let problem = RadialProblem::with_bump_data(dim, p, eps, 3.0).unwrap();
        let grid = RadialGrid::for_horizon(&dim, 3.0, 12.0, 0.01).unwrap();
        (problem, grid)
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let problem = RadialProblem::new(dim, 2.0, 1.0, Profile::Zero, Profile::Zero, 3.0).unwrap();
        let grid = RadialGrid::for_horizon(&dim, 3.0, 2.0, 0.02).unwrap();
        let tf = TestFunctionSet::build(dim, grid).unwrap();
        let probes = Probes::new(tf, 0.5);
        let cfg = SolverConfig::default();
        let (trace, report) = run(&problem, &cfg, 2.0, &probes).unwrap();
        assert!(!report.blew_up);
        assert!(trace.sup_norm.iter().all(|&s| s == 0.0));
        assert!(trace.f0.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_energy_dissipates_monotonically() {
        // Single smooth mode on a large 1D grid, nonlinearity off: the
        // discrete energy is nonincreasing to rounding at every output.
        let dim = Dimension::half_line();
        let problem = RadialProblem::new(
            dim,
            2.0,
            1.0,
            Profile::QuarticBump {
                center: 4.0,
                width: 2.0,
            },
            Profile::Zero,
            6.0,
        )
        .unwrap();
        let grid = RadialGrid::for_horizon(&dim, 6.0, 4.0, 0.01).unwrap();
        let tf = TestFunctionSet::build(dim, grid).unwrap();
        let probes = Probes::new(tf, 0.2);
        let cfg = SolverConfig {
            nonlinearity: false,
            dt: 2e-3,
            ..Default::default()
        };
        let (trace, _) = run(&problem, &cfg, 4.0, &probes).unwrap();
        let e0 = trace.energy[0];
        assert!(e0 > 0.0);
        for w in trace.energy.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-9),
                "energy rose: {} -> {}",
                w[0],
                w[1]
            );
        }
        // Damping actually burns energy, not just rounding drift.
        assert!(trace.energy.last().unwrap() < &(0.9 * e0));
    }

    #[test]
    fn boundary_zeros_preserved_exactly() {
        let (problem, grid) = problem_3d(1.0, 2.0);
        let state = initial_state(&problem, &grid);
        let next = step(&state, 1e-3, &SolverConfig::default(), &problem, &grid);
        assert_eq!(next.u[0], 0.0);
        assert_eq!(next.v[0], 0.0);
        assert_eq!(*next.u.last().unwrap(), 0.0);
        assert_eq!(*next.v.last().unwrap(), 0.0);
    }

    #[test]
    fn grid_too_small_is_refused() {
        let (problem, _) = problem_3d(1.0, 2.0);
        let dim = problem.dim;
        let small = RadialGrid::with_spacing(dim.boundary_radius(), 6.0, 0.01).unwrap();
        let tf = TestFunctionSet::build(dim, small).unwrap();
        let probes = Probes::new(tf, 0.5);
        assert!(matches!(
            run(&problem, &SolverConfig::default(), 12.0, &probes),
            Err(SolverError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn small_amplitude_matches_scaled_linear_run() {
        // Richardson check of the O(eps^p) nonlinear correction: the defect
        // u_eps - eps u_lin at t = 1 shrinks by ~2^p when eps is halved.
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let grid = RadialGrid::for_horizon(&dim, 3.0, 1.0, 0.01).unwrap();
        let tf = TestFunctionSet::build(dim, grid.clone()).unwrap();
        let probes = Probes::new(tf, 0.25);
        let defect = |eps: f64| -> f64 {
            let nl = RadialProblem::with_bump_data(dim, 2.0, eps, 3.0).unwrap();
            let lin = RadialProblem::with_bump_data(dim, 2.0, eps, 3.0).unwrap();
            let cfg_nl = SolverConfig {
                dt: 1e-3,
                ..Default::default()
            };
            let cfg_lin = SolverConfig {
                dt: 1e-3,
                nonlinearity: false,
                ..cfg_nl
            };
            let mut s_nl = initial_state(&nl, &grid);
            let mut s_lin = initial_state(&lin, &grid);
            let stencil = Stencil::build(&grid, &dim);
            let mut ws = Workspace::new(grid.len());
            for _ in 0..1000 {
                step_with(&mut s_nl, 1e-3, &cfg_nl, &nl, &stencil, &mut ws);
                step_with(&mut s_lin, 1e-3, &cfg_lin, &lin, &stencil, &mut ws);
            }
            let _ = &probes;
            s_nl.u
                .iter()
                .zip(&s_lin.u)
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
        };
        let d1 = defect(0.2);
        let d2 = defect(0.1);
        let ratio = d1 / d2;
        // p = 2: expect ~4.
        assert!(
            (2.6..6.0).contains(&ratio),
            "defect ratio {ratio}, d1 = {d1}, d2 = {d2}"
        );
    }

    #[test]
    fn grid_convergence_of_f0_is_second_order() {
        // Fixed smooth run to t = 1; halving h and dt together refines
        // F0(1) at order >= 1.8. All three runs integrate over the same
        // [r0, rmax] so the comparison sees only the discretization.
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let f0_at = |h: f64, dt: f64| -> f64 {
            let problem = RadialProblem::with_bump_data(dim, 2.0, 0.5, 3.0).unwrap();
            let grid = RadialGrid::with_spacing(1.0, 4.5, h).unwrap();
            let tf = TestFunctionSet::build(dim, grid).unwrap();
            let probes = Probes::new(tf, 0.5);
            let cfg = SolverConfig {
                dt,
                ..Default::default()
            };
            let (trace, _) = run(&problem, &cfg, 1.0, &probes).unwrap();
            *trace.f0.last().unwrap()
        };
        let c = f0_at(0.04, 8e-3);
        let m = f0_at(0.02, 4e-3);
        let f = f0_at(0.01, 2e-3);
        let order = ((c - m).abs() / (m - f).abs()).log2();
        assert!(order > 1.8, "observed order {order}");
    }

    #[test]
    fn blowup_run_detects_and_extrapolates() {
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let problem = RadialProblem::with_bump_data(dim, 2.0, 1.0, 3.0).unwrap();
        let grid = RadialGrid::for_horizon(&dim, 3.0, 20.0, 0.02).unwrap();
        let tf = TestFunctionSet::build(dim, grid).unwrap();
        let probes = Probes::new(tf, 0.05);
        let cfg = SolverConfig {
            dt: 2e-3,
            blowup_threshold: 1e8,
            ..Default::default()
        };
        let (trace, report) = run(&problem, &cfg, 20.0, &probes).unwrap();
        assert!(report.blew_up, "expected blow-up, got {report:?}");
        let t_est = report.t_blowup_est.unwrap();
        assert!(t_est >= report.t_end);
        assert!(t_est < 20.0);
        assert!(trace.f1.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn dt_floor_with_sustained_growth_marks_blowup() {
        // With an unreachable sup-norm threshold the run must still end in
        // blow-up when the step controller pins dt at dt_min under
        // sustained growth.
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let problem = RadialProblem::with_bump_data(dim, 2.0, 2.0, 3.0).unwrap();
        let grid = RadialGrid::for_horizon(&dim, 3.0, 12.0, 0.02).unwrap();
        let tf = TestFunctionSet::build(dim, grid).unwrap();
        let probes = Probes::new(tf, 0.1);
        let cfg = SolverConfig {
            dt: 2e-3,
            dt_min: 1e-4,
            blowup_threshold: 1e250,
            ..Default::default()
        };
        let (_, report) = run(&problem, &cfg, 12.0, &probes).unwrap();
        assert!(report.blew_up, "expected dt-floor blow-up, got {report:?}");
        assert!(report.f_max < 1e250);
        assert!(report.t_end < 12.0);
    }
}
