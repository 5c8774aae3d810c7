//! Test functions of the blow-up machinery on a radial grid.
//!
//! `phi0` is the bounded/positive harmonic function vanishing on the
//! boundary, explicit in each radial geometry:
//!
//! * n >= 3: `1 - (r0/r)^{n-2}`, increasing to 1;
//! * n = 2:  `ln(r/r0)`, increasing like `ln r`;
//! * n = 1:  `x`, linear growth.
//!
//! `phi1` solves the eigenvalue problem `lap(phi1) = phi1/2` with
//! `phi1 = 0` on the boundary. Radially this is
//! `phi'' + ((n-1)/r) phi' = phi/2`, integrated outward from the boundary
//! with the normalization `phi'(r0) = 1` (the eigenfunction is only
//! determined up to positive scaling). Its values grow like
//! `r^{-(n-1)/2} e^{r/sqrt(2)}`, so the natural log of the samples is kept
//! alongside the raw values for log-space quadrature of weighted integrals.
//!
//! The space-time weight is `psi1(x, t) = phi1(x) e^{-t}`, which satisfies
//! `(psi1)_t = -psi1`, `(psi1)_tt = psi1`, and `lap(psi1) = psi1/2`.

use std::error::Error;
use std::fmt;

use crate::fit::linear_fit;
use crate::grid::{Dimension, RadialGrid};
use crate::ivp::{Control, DormandPrince54, IvpOutcome};

#[derive(Debug, Clone, PartialEq)]
pub enum TestFnError {
    /// The grid must start exactly at the domain boundary.
    GridNotAtBoundary {
        grid_r0: f64,
        boundary: f64,
    },
    /// Outward integration lost positivity; the solution of this IVP is
    /// provably increasing, so this indicates a stepping bug.
    PositivityLost {
        r: f64,
    },
    IntegrationFailed(String),
}

impl fmt::Display for TestFnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFnError::GridNotAtBoundary { grid_r0, boundary } => write!(
                f,
                "grid starts at {grid_r0} but the domain boundary is at {boundary}"
            ),
            TestFnError::PositivityLost { r } => {
                write!(f, "phi1 lost positivity at r = {r}")
            }
            TestFnError::IntegrationFailed(msg) => write!(f, "phi1 integration failed: {msg}"),
        }
    }
}

impl Error for TestFnError {}

/// Sampled `phi0` and `phi1` on a radial grid, with `ln(phi1)` kept for
/// log-space work.
#[derive(Debug, Clone)]
pub struct TestFunctionSet {
    pub grid: RadialGrid,
    pub dim: Dimension,
    pub phi0: Vec<f64>,
    pub phi1: Vec<f64>,
    /// `ln(phi1)` at every node; `-inf` at the boundary node.
    pub ln_phi1: Vec<f64>,
}

/// Closed-form harmonic weight for the given geometry.
pub fn phi0_at(dim: &Dimension, r: f64) -> f64 {
    let r0 = dim.boundary_radius();
    match dim.n() {
        1 => r,
        2 => (r / r0).ln(),
        n => 1.0 - (r0 / r).powi(n as i32 - 2),
    }
}

/// Sample the harmonic weight on a grid whose first node is the boundary.
pub fn build_phi0(dim: &Dimension, grid: &RadialGrid) -> Result<Vec<f64>, TestFnError> {
    check_boundary(dim, grid)?;
    let mut v = grid.sample(|r| phi0_at(dim, r));
    v[0] = 0.0;
    Ok(v)
}

/// Integrate the eigenfunction IVP outward and sample it on the grid.
/// Returns node values together with their natural logs; the linear ODE is
/// rescaled on the fly whenever the values threaten to overflow, so the log
/// samples stay finite on arbitrarily large grids.
pub fn build_phi1(dim: &Dimension, grid: &RadialGrid) -> Result<(Vec<f64>, Vec<f64>), TestFnError> {
    check_boundary(dim, grid)?;
    let n = dim.n() as f64;
    let m = grid.len();
    let r0 = grid.r0();
    let h = grid.h();

    let mut phi = vec![0.0f64; m];
    let mut ln_phi = vec![f64::NEG_INFINITY; m];

    // phi'' = phi/2 - ((n-1)/r) phi'; for n = 1 the drift term is absent
    // and r = 0 is a regular point.
    let rhs = move |r: f64, y: &[f64; 2]| -> [f64; 2] {
        let drift = if n > 1.0 { (n - 1.0) / r * y[1] } else { 0.0 };
        [y[1], 0.5 * y[0] - drift]
    };

    // Hermite interpolation between accepted steps contaminates discrete
    // second differences at step knots by O(step^2); tying the step to the
    // grid spacing keeps that error at the same order as the grid's own
    // truncation error.
    let solver = DormandPrince54 {
        rtol: 1e-10,
        atol: 1e-300,
        max_step: (4.0 * h).max(1e-6),
        min_step: 1e-13,
        initial_step: h.min(1e-3),
    };

    // Running log-offset: the stored state is phi * e^{-offset}.
    let mut offset = 0.0f64;
    let mut next_node = 1usize;
    let mut fail: Option<TestFnError> = None;

    let mut t_cur = r0;
    let mut y_cur = [0.0f64, 1.0];
    while next_node < m && fail.is_none() {
        let (t_fin, y_fin, outcome, _) = solver
            .integrate(rhs, t_cur, y_cur, grid.rmax(), |step| {
                while next_node < m {
                    let r = grid.node(next_node);
                    if r > step.t1 + 1e-12 * h.max(1.0) {
                        break;
                    }
                    let y = if (r - step.t1).abs() <= 1e-12 * h.max(1.0) {
                        step.y1
                    } else {
                        step.interpolate(r)
                    };
                    if !(y[0] > 0.0) {
                        fail = Some(TestFnError::PositivityLost { r });
                        return Control::Stop;
                    }
                    ln_phi[next_node] = y[0].ln() + offset;
                    phi[next_node] = ln_phi[next_node].exp();
                    next_node += 1;
                }
                // Rescale before the state overflows; the ODE is linear.
                if step.y1[0] > 1e250 {
                    Control::Stop
                } else {
                    Control::Continue
                }
            })
            .map_err(|e| TestFnError::IntegrationFailed(e.to_string()))?;

        if let Some(err) = fail.take() {
            return Err(err);
        }
        match outcome {
            IvpOutcome::ReachedEnd => break,
            IvpOutcome::Stopped => {
                // Rescale and resume.
                let scale = y_fin[0];
                offset += scale.ln();
                t_cur = t_fin;
                y_cur = [1.0, y_fin[1] / scale];
            }
            IvpOutcome::StepUnderflow => {
                return Err(TestFnError::IntegrationFailed(format!(
                    "step underflow at r = {t_fin}"
                )));
            }
        }
    }
    Ok((phi, ln_phi))
}

fn check_boundary(dim: &Dimension, grid: &RadialGrid) -> Result<(), TestFnError> {
    let boundary = dim.boundary_radius();
    if (grid.r0() - boundary).abs() > 1e-12 * boundary.abs().max(1.0) {
        return Err(TestFnError::GridNotAtBoundary {
            grid_r0: grid.r0(),
            boundary,
        });
    }
    Ok(())
}

impl TestFunctionSet {
    pub fn build(dim: Dimension, grid: RadialGrid) -> Result<Self, TestFnError> {
        let phi0 = build_phi0(&dim, &grid)?;
        let (phi1, ln_phi1) = build_phi1(&dim, &grid)?;
        Ok(TestFunctionSet {
            grid,
            dim,
            phi0,
            phi1,
            ln_phi1,
        })
    }

    /// Samples of `psi1(., t) = phi1 e^{-t}`.
    pub fn psi1_at(&self, t: f64) -> Vec<f64> {
        assert!(t >= 0.0, "psi1 is defined for t >= 0");
        let s = (-t).exp();
        self.phi1.iter().map(|&v| v * s).collect()
    }

    /// Discrete radial Laplacian residual of `phi0`: `max_i |L phi0_i|`
    /// over interior nodes. Zero in exact arithmetic, O(h^2) discretely.
    pub fn residual_harmonic(&self) -> f64 {
        let lap = discrete_radial_laplacian(&self.grid, &self.dim, &self.phi0);
        lap.iter()
            .skip(1)
            .take(self.grid.len() - 2)
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    /// Eigen-residual of `phi1`: `max_i |L phi1_i - phi1_i/2|` over
    /// interior nodes, relative to the local magnitude of `phi1` floored at
    /// the normalization scale 1 (relative because `phi1` grows
    /// exponentially; the floor keeps the near-boundary nodes, where `phi1`
    /// vanishes linearly, from dividing by zero).
    pub fn residual_eigen(&self) -> f64 {
        let lap = discrete_radial_laplacian(&self.grid, &self.dim, &self.phi1);
        let mut worst = 0.0f64;
        for i in 1..self.grid.len() - 1 {
            let denom = self.phi1[i].abs().max(1.0);
            worst = worst.max((lap[i] - 0.5 * self.phi1[i]).abs() / denom);
        }
        worst
    }

    /// Slope of `ln(phi1) + ((n-1)/2) ln r` against `r` over the outer half
    /// of the grid; the eigenfunction envelope gives `1/sqrt(2)`.
    pub fn growth_rate_fit(&self) -> f64 {
        let m = self.grid.len();
        let start = m / 2;
        let xs: Vec<f64> = (start..m).map(|i| self.grid.node(i)).collect();
        let half = (self.dim.n() as f64 - 1.0) / 2.0;
        let ys: Vec<f64> = (start..m)
            .map(|i| self.ln_phi1[i] + half * self.grid.node(i).ln())
            .collect();
        linear_fit(&xs, &ys).map(|l| l.slope).unwrap_or(f64::NAN)
    }
}

/// Second-order discrete radial Laplacian in conservative (flux) form:
/// `L u_i = (rho_{i+1/2} (u_{i+1}-u_i) - rho_{i-1/2} (u_i-u_{i-1})) /
/// (h^2 r_i^{n-1})` with `rho = r^{n-1}` at cell midpoints. For n = 1 this
/// is the classic three-point second difference. Boundary entries are zero.
pub fn discrete_radial_laplacian(grid: &RadialGrid, dim: &Dimension, u: &[f64]) -> Vec<f64> {
    let m = grid.len();
    let h = grid.h();
    let nm1 = dim.n() as i32 - 1;
    let mut out = vec![0.0; m];
    for i in 1..m - 1 {
        let r = grid.node(i);
        let rho_plus = (r + 0.5 * h).powi(nm1);
        let rho_minus = (r - 0.5 * h).powi(nm1);
        let w = r.powi(nm1);
        out[i] = (rho_plus * (u[i + 1] - u[i]) - rho_minus * (u[i] - u[i - 1])) / (h * h * w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn dim3() -> Dimension {
        Dimension::exterior_ball(3, 1.0).unwrap()
    }

    #[test]
    fn phi0_closed_forms() {
        // n = 3, r0 = 1: phi0(2) = 1 - 1/2.
        assert!((phi0_at(&dim3(), 2.0) - 0.5).abs() < 1e-15);
        // n = 2, r0 = 1: phi0(e) = 1.
        let d2 = Dimension::exterior_ball(2, 1.0).unwrap();
        assert!((phi0_at(&d2, std::f64::consts::E) - 1.0).abs() < 1e-15);
        // n = 1: phi0(x) = x.
        assert_eq!(phi0_at(&Dimension::half_line(), 5.0), 5.0);
    }

    #[test]
    fn phi0_bounds_per_dimension() {
        // n >= 3: 0 < phi0 < 1 strictly on the interior.
        let grid = RadialGrid::new(1.0, 50.0, 2001).unwrap();
        let v = build_phi0(&dim3(), &grid).unwrap();
        assert_eq!(v[0], 0.0);
        for &x in &v[1..] {
            assert!(x > 0.0 && x < 1.0);
        }
        // Monotone nondecreasing in every geometry.
        for dim in [
            Dimension::half_line(),
            Dimension::exterior_ball(2, 1.0).unwrap(),
            dim3(),
        ] {
            let g =
                RadialGrid::new(dim.boundary_radius(), dim.boundary_radius() + 9.0, 901).unwrap();
            let v = build_phi0(&dim, &g).unwrap();
            for w in v.windows(2) {
                assert!(w[1] >= w[0]);
            }
        }
    }

    #[test]
    fn phi0_rejects_misaligned_grid() {
        let grid = RadialGrid::new(1.5, 5.0, 101).unwrap();
        assert!(matches!(
            build_phi0(&dim3(), &grid),
            Err(TestFnError::GridNotAtBoundary { .. })
        ));
    }

    #[test]
    fn phi1_half_line_matches_sinh() {
        // Closed form sqrt(2) sinh(x / sqrt 2); spot value at x = 1 is
        // 1.0854416... and agreement is to 1e-8 relative across [0, 10].
        let dim = Dimension::half_line();
        let grid = RadialGrid::new(0.0, 10.0, 10_001).unwrap();
        let (phi, ln_phi) = build_phi1(&dim, &grid).unwrap();
        let mut worst = 0.0f64;
        for (i, r) in grid.nodes().enumerate().skip(1) {
            let exact = SQRT2 * (r / SQRT2).sinh();
            worst = worst.max((phi[i] - exact).abs() / exact);
            assert!((ln_phi[i] - phi[i].ln()).abs() < 1e-12);
        }
        assert!(worst < 1e-8, "max relative error {worst:.3e}");
        let at_one = grid.last_node_leq(1.0);
        assert!((phi[at_one] - 1.085_441_641_3).abs() < 1e-9);
    }

    #[test]
    fn phi1_exterior_ball_matches_w_substitution() {
        // n = 3, r0 = 1: w = r phi solves w'' = w/2, so
        // phi = (sqrt 2 / r) sinh((r-1)/sqrt 2); at r = 2 this is
        // 0.5427208... .
        let grid = RadialGrid::new(1.0, 8.0, 7001).unwrap();
        let (phi, _) = build_phi1(&dim3(), &grid).unwrap();
        let mut worst = 0.0f64;
        for (i, r) in grid.nodes().enumerate().skip(1) {
            let exact = SQRT2 / r * ((r - 1.0) / SQRT2).sinh();
            worst = worst.max((phi[i] - exact).abs() / exact);
        }
        assert!(worst < 1e-8, "max relative error {worst:.3e}");
        let at_two = grid.last_node_leq(2.0);
        let expected = SQRT2 / 2.0 * (1.0 / SQRT2).sinh();
        assert!((phi[at_two] - expected).abs() < 1e-9);
        assert!((expected - 0.542_720_820_6).abs() < 1e-9);
    }

    #[test]
    fn phi1_log_samples_survive_overflow() {
        // On a grid reaching r ~ 1100 the raw eigenfunction exceeds the
        // f64 range (growth ~ e^{r/sqrt 2}); the rescaled integration keeps
        // ln(phi1) finite and increasing while the raw samples saturate to
        // infinity without producing NaNs.
        let grid = RadialGrid::new(1.0, 1100.0, 2200).unwrap();
        let (phi, ln_phi) = build_phi1(&dim3(), &grid).unwrap();
        assert!(ln_phi[1..].iter().all(|v| v.is_finite()));
        for w in ln_phi[1..].windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(phi.iter().any(|v| v.is_infinite()));
        assert!(phi.iter().all(|v| !v.is_nan()));
        // Far-field slope of ln(phi1) approaches 1/sqrt 2.
        let m = grid.len();
        let slope = (ln_phi[m - 1] - ln_phi[m - 201]) / (200.0 * grid.h());
        assert!((slope - 1.0 / SQRT2).abs() < 1e-3, "slope {slope}");
    }

    #[test]
    fn phi1_boundary_and_monotonicity() {
        for dim in [
            Dimension::half_line(),
            Dimension::exterior_ball(2, 1.0).unwrap(),
            dim3(),
        ] {
            let r0 = dim.boundary_radius();
            let grid = RadialGrid::new(r0, r0 + 12.0, 1201).unwrap();
            let (phi, _) = build_phi1(&dim, &grid).unwrap();
            assert_eq!(phi[0], 0.0);
            for w in phi.windows(2) {
                assert!(w[1] > w[0], "phi1 must increase strictly");
            }
        }
    }

    #[test]
    fn psi1_scaling_and_time_derivative() {
        let grid = RadialGrid::new(1.0, 6.0, 501).unwrap();
        let tf = TestFunctionSet::build(dim3(), grid).unwrap();
        // t = 0 leaves phi1 unchanged; t = ln 2 halves it.
        assert_eq!(tf.psi1_at(0.0), tf.phi1);
        let halved = tf.psi1_at(2.0f64.ln());
        for (a, b) in halved.iter().zip(&tf.phi1) {
            assert!((a - 0.5 * b).abs() <= 1e-15 * b.abs());
        }
        // Central difference in t reproduces (psi1)_t = -psi1 to O(h^2).
        let t = 0.7;
        let dt = 1e-4;
        let plus = tf.psi1_at(t + dt);
        let minus = tf.psi1_at(t - dt);
        let base = tf.psi1_at(t);
        for i in 1..base.len() {
            let dot = (plus[i] - minus[i]) / (2.0 * dt);
            assert!((dot + base[i]).abs() < 1e-7 * base[i].abs().max(1e-12));
        }
        // psi1(t) e^t returns phi1 to ulp scale for t up to 50.
        for &t in &[1.0, 10.0, 50.0] {
            let back = tf.psi1_at(t);
            let e = t.exp();
            for (a, b) in back.iter().zip(&tf.phi1) {
                assert!((a * e - b).abs() <= 1e-15 * b.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn harmonic_residual_small_and_second_order() {
        // n = 3 closed form on [1, 5]: O(h^2) residual, < 1e-4 at h = 1e-3.
        let grid = RadialGrid::new(1.0, 5.0, 4001).unwrap();
        let tf = TestFunctionSet::build(dim3(), grid).unwrap();
        assert!(tf.residual_harmonic() < 1e-4);

        // n = 1: linear phi0 is differenced exactly (power-of-two spacing
        // keeps the node values themselves exact).
        let g1 = RadialGrid::new(0.0, 4.0, 513).unwrap();
        let tf1 = TestFunctionSet::build(Dimension::half_line(), g1).unwrap();
        assert_eq!(tf1.residual_harmonic(), 0.0);

        // n = 2: halving h cuts the residual about fourfold.
        let d2 = Dimension::exterior_ball(2, 1.0).unwrap();
        let res = |m: usize| {
            let g = RadialGrid::new(1.0, 5.0, m).unwrap();
            TestFunctionSet::build(d2, g).unwrap().residual_harmonic()
        };
        let ratio = res(501) / res(1001);
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn eigen_residual_small_and_second_order() {
        let dim = Dimension::half_line();
        let res = |m: usize| {
            let g = RadialGrid::new(0.0, 5.0, m).unwrap();
            TestFunctionSet::build(dim, g).unwrap().residual_eigen()
        };
        let coarse = res(1001);
        let fine = res(2001);
        assert!(coarse < 1e-4, "relative residual {coarse}");
        let ratio = coarse / fine;
        assert!((2.5..6.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn growth_rate_matches_envelope() {
        for dim in [
            Dimension::half_line(),
            Dimension::exterior_ball(2, 1.0).unwrap(),
            dim3(),
        ] {
            let r0 = dim.boundary_radius();
            let grid = RadialGrid::new(r0, r0 + 8.0, 4001).unwrap();
            let tf = TestFunctionSet::build(dim, grid).unwrap();
            let slope = tf.growth_rate_fit();
            let target = 1.0 / SQRT2;
            assert!(
                (slope - target).abs() < 0.02 * target,
                "n = {}: slope {slope} vs {target}",
                tf.dim.n()
            );
        }
    }

    #[test]
    fn laplacian_examples() {
        let grid = RadialGrid::new(1.0, 5.0, 2001).unwrap();
        let dim = dim3();
        // Harmonic oracle: L phi0 ~ 0.
        let phi0 = build_phi0(&dim, &grid).unwrap();
        let lap0 = discrete_radial_laplacian(&grid, &dim, &phi0);
        let worst0 = lap0[1..grid.len() - 1]
            .iter()
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        assert!(worst0 < 1e-5);
        // Eigen oracle: L phi1 ~ phi1 / 2 relatively (unit floor near the
        // boundary, where phi1 itself vanishes).
        let (phi1, _) = build_phi1(&dim, &grid).unwrap();
        let lap1 = discrete_radial_laplacian(&grid, &dim, &phi1);
        for i in 1..grid.len() - 1 {
            assert!((lap1[i] - 0.5 * phi1[i]).abs() < 1e-4 * phi1[i].max(1.0));
        }
        // Linear function on the half-line: exactly zero with exactly
        // representable nodes.
        let d1 = Dimension::half_line();
        let g1 = RadialGrid::new(0.0, 4.0, 513).unwrap();
        let u = g1.sample(|x| 3.0 * x);
        let lap = discrete_radial_laplacian(&g1, &d1, &u);
        assert!(lap.iter().all(|&v| v == 0.0));
    }
}
