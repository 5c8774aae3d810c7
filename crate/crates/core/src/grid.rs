//! Radial grids, the n-dimensional surface measure, weighted quadrature,
//! and exponent utilities shared by every other module.
//!
//! A radial function `f(r)` on the exterior domain integrates as
//! `int f dx = omega_n int f(r) r^{n-1} dr`, where `omega_n` is the surface
//! area of the unit (n-1)-sphere; the half-line (n = 1) carries weight 1.
//! The quadrature below treats `f` as piecewise linear and integrates the
//! moments of `r^{n-1}` exactly per cell, so integrands `(a + b r) r^{n-1}`
//! are reproduced to rounding and smooth integrands converge at second
//! order in the spacing.

use std::error::Error;
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// n = 0 is not a spatial dimension.
    ZeroDimension,
    /// Exterior-of-ball geometry needs n >= 2.
    BallGeometryDimension(u32),
    /// Exterior-of-ball geometry needs a strictly positive obstacle radius.
    NonPositiveObstacle(f64),
    /// Grid bounds or node count violate `r0 < rmax`, `m >= 3`.
    BadGrid { r0: f64, rmax: f64, m: usize },
    /// Requested truncation radius lies outside `[r0, rmax]`.
    TruncationOutOfRange { rho: f64, r0: f64, rmax: f64 },
    /// Sample vector length does not match the node count.
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::ZeroDimension => write!(f, "dimension must satisfy n >= 1"),
            GridError::BallGeometryDimension(n) => {
                write!(f, "exterior-of-ball geometry needs n >= 2, got n = {n}")
            }
            GridError::NonPositiveObstacle(r0) => {
                write!(f, "obstacle radius must be positive for n >= 2, got {r0}")
            }
            GridError::BadGrid { r0, rmax, m } => {
                write!(f, "invalid grid: r0 = {r0}, rmax = {rmax}, m = {m}")
            }
            GridError::TruncationOutOfRange { rho, r0, rmax } => {
                write!(f, "truncation radius {rho} outside grid [{r0}, {rmax}]")
            }
            GridError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} samples, got {got}")
            }
        }
    }
}

impl Error for GridError {}

/// Spatial dimension together with the radial geometry of the domain:
/// the half-line `x > 0` for n = 1, the exterior of a ball of radius
/// `r0 > 0` for n >= 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimension {
    n: u32,
    r0: f64,
}

impl Dimension {
    /// Half-line geometry (n = 1); the boundary is the single point x = 0.
    pub fn half_line() -> Self {
        Dimension { n: 1, r0: 0.0 }
    }

    /// Exterior of the ball of radius `r0 > 0` in dimension `n >= 2`.
    pub fn exterior_ball(n: u32, r0: f64) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::BallGeometryDimension(n));
        }
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(GridError::NonPositiveObstacle(r0));
        }
        Ok(Dimension { n, r0 })
    }

    /// Convenience constructor: n = 1 maps to the half-line (ignoring `r0`),
    /// n >= 2 to the exterior ball.
    pub fn new(n: u32, r0: f64) -> Result<Self, GridError> {
        match n {
            0 => Err(GridError::ZeroDimension),
            1 => Ok(Dimension::half_line()),
            _ => Dimension::exterior_ball(n, r0),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Radius of the domain boundary: `r0` for n >= 2, `0` for n = 1.
    pub fn boundary_radius(&self) -> f64 {
        self.r0
    }

    /// Weight of the radial surface measure: `omega_n = 2 pi^{n/2} / Gamma(n/2)`
    /// for n >= 2 and 1 for the (one-sided) half-line.
    pub fn surface_weight(&self) -> f64 {
        if self.n == 1 {
            1.0
        } else {
            let half = self.n as f64 / 2.0;
            2.0 * PI.powf(half) / gamma(half)
        }
    }

    /// Volume of the unit ball, `pi^{n/2} / Gamma(n/2 + 1)`.
    pub fn unit_ball_volume(&self) -> f64 {
        let half = self.n as f64 / 2.0;
        PI.powf(half) / gamma(half + 1.0)
    }
}

/// Critical (Strauss) exponent: `+inf` for n = 1, otherwise the positive
/// root of `(n-1) p^2 - (n+1) p - 2 = 0`.
pub fn strauss_exponent(n: u32) -> Result<f64, GridError> {
    match n {
        0 => Err(GridError::ZeroDimension),
        1 => Ok(f64::INFINITY),
        _ => {
            let nf = n as f64;
            let disc = (nf + 1.0) * (nf + 1.0) + 8.0 * (nf - 1.0);
            Ok(((nf + 1.0) + disc.sqrt()) / (2.0 * (nf - 1.0)))
        }
    }
}

/// Uniform radial grid on `[r0, rmax]` with `m` nodes; node `i` sits at
/// `r0 + i h` with `h = (rmax - r0)/(m - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r0: f64,
    rmax: f64,
    m: usize,
    h: f64,
}

impl RadialGrid {
    pub fn new(r0: f64, rmax: f64, m: usize) -> Result<Self, GridError> {
        if !(r0 < rmax) || m < 3 || !r0.is_finite() || !rmax.is_finite() {
            return Err(GridError::BadGrid { r0, rmax, m });
        }
        let h = (rmax - r0) / (m - 1) as f64;
        Ok(RadialGrid { r0, rmax, m, h })
    }

    /// Grid with spacing as close to `h_target` as a whole node count allows,
    /// covering at least `[r0, rmax_min]`.
    pub fn with_spacing(r0: f64, rmax_min: f64, h_target: f64) -> Result<Self, GridError> {
        if !(h_target > 0.0) || !(rmax_min > r0) {
            return Err(GridError::BadGrid {
                r0,
                rmax: rmax_min,
                m: 0,
            });
        }
        let cells = ((rmax_min - r0) / h_target).ceil() as usize;
        let cells = cells.max(2);
        let rmax = r0 + cells as f64 * h_target;
        RadialGrid::new(r0, rmax, cells + 1)
    }

    /// Grid sized for a simulation horizon: `rmax >= R + t_end + 2h`, so a
    /// solution launched with support radius `R` never reaches the outer
    /// Dirichlet node within the horizon (up to the discretization smear).
    pub fn for_horizon(
        dim: &Dimension,
        support_radius: f64,
        t_end: f64,
        h: f64,
    ) -> Result<Self, GridError> {
        let r0 = dim.boundary_radius();
        RadialGrid::with_spacing(r0, support_radius + t_end + 2.0 * h, h)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn rmax(&self) -> f64 {
        self.rmax
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        self.r0 + i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |i| self.node(i))
    }

    /// Index of the last node with `node(i) <= r` (clamped to the grid).
    pub fn last_node_leq(&self, r: f64) -> usize {
        if r <= self.r0 {
            return 0;
        }
        let i = ((r - self.r0) / self.h + 1e-12).floor() as usize;
        i.min(self.m - 1)
    }

    /// Evaluate a function at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }
}

/// `int_a^b r^{n-1} dr` and `int_a^b r^n dr`, with a cancellation-safe path
/// when the cell is narrow relative to its radius.
fn cell_moments(a: f64, b: f64, n: u32) -> (f64, f64) {
    (power_integral(a, b, n - 1), power_integral(a, b, n))
}

fn power_integral(a: f64, b: f64, k: u32) -> f64 {
    let kk = (k + 1) as f64;
    if a > 0.0 && (b - a) < 0.1 * a {
        // b^(k+1) - a^(k+1) = a^(k+1) expm1((k+1) ln1p((b-a)/a))
        a.powi(k as i32 + 1) * ((kk * ((b - a) / a).ln_1p()).exp_m1()) / kk
    } else {
        (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / kk
    }
}

/// Weighted integral `int f dx` of a radial function given by its node
/// samples: piecewise-linear in `f`, exact in the `r^{n-1}` weight.
pub fn radial_quadrature(grid: &RadialGrid, f: &[f64], dim: &Dimension) -> Result<f64, GridError> {
    radial_quadrature_to(grid, f, dim, grid.rmax())
}

/// Same as [`radial_quadrature`] but truncated at radius `rho`; the last
/// (generally partial) cell uses the linear interpolant of `f`.
pub fn radial_quadrature_to(
    grid: &RadialGrid,
    f: &[f64],
    dim: &Dimension,
    rho: f64,
) -> Result<f64, GridError> {
    if f.len() != grid.len() {
        return Err(GridError::LengthMismatch {
            expected: grid.len(),
            got: f.len(),
        });
    }
    let tol = 1e-9 * grid.h();
    if rho < grid.r0() - tol || rho > grid.rmax() + tol {
        return Err(GridError::TruncationOutOfRange {
            rho,
            r0: grid.r0(),
            rmax: grid.rmax(),
        });
    }
    let rho = rho.clamp(grid.r0(), grid.rmax());
    let n = dim.n();
    let h = grid.h();
    let mut total = 0.0;
    for i in 0..grid.len() - 1 {
        let a = grid.node(i);
        if a >= rho {
            break;
        }
        let b_full = grid.node(i + 1);
        let b = b_full.min(rho);
        // Linear interpolant of f on [a, b_full], integrated against r^{n-1}
        // over [a, b] using exact moments.
        let (m0, m1) = cell_moments(a, b, n);
        let fa = f[i];
        let fb = f[i + 1];
        let slope = (fb - fa) / h;
        total += fa * m0 + slope * (m1 - a * m0);
    }
    Ok(total * dim.surface_weight())
}

/// Gamma function for positive arguments via the Lanczos approximation
/// (g = 7, 9 terms; relative error below 1e-12 on the range used here).
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the series argument away from zero.
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        for (i, c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        let t = x + G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn gamma_reference_values() {
        assert!(close(gamma(0.5), PI.sqrt(), 1e-12));
        assert!(close(gamma(1.0), 1.0, 1e-12));
        assert!(close(gamma(1.5), PI.sqrt() / 2.0, 1e-12));
        assert!(close(gamma(5.0), 24.0, 1e-12));
        assert!(close(gamma(10.0), 362880.0, 1e-12));
    }

    #[test]
    fn surface_weights() {
        assert_eq!(Dimension::half_line().surface_weight(), 1.0);
        let d2 = Dimension::exterior_ball(2, 1.0).unwrap();
        let d3 = Dimension::exterior_ball(3, 1.0).unwrap();
        let d4 = Dimension::exterior_ball(4, 1.0).unwrap();
        assert!(close(d2.surface_weight(), 2.0 * PI, 1e-12));
        assert!(close(d3.surface_weight(), 4.0 * PI, 1e-12));
        assert!(close(d4.surface_weight(), 2.0 * PI * PI, 1e-12));
        assert!(close(d3.unit_ball_volume(), 4.0 * PI / 3.0, 1e-12));
    }

    #[test]
    fn strauss_exponent_values() {
        // n = 1 is critical-free.
        assert_eq!(strauss_exponent(1).unwrap(), f64::INFINITY);
        // Positive roots of p^2 - 3p - 2 and 2p^2 - 4p - 2.
        let p2 = strauss_exponent(2).unwrap();
        let p3 = strauss_exponent(3).unwrap();
        assert!((p2 - (3.0 + 17.0_f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((p3 - (1.0 + 2.0_f64.sqrt())).abs() < 1e-14);
        assert!(strauss_exponent(0).is_err());
    }

    #[test]
    fn strauss_exponent_satisfies_quadratic() {
        for n in 2..=10u32 {
            let p = strauss_exponent(n).unwrap();
            let nf = n as f64;
            let res = (nf - 1.0) * p * p - (nf + 1.0) * p - 2.0;
            assert!(res.abs() < 1e-12, "n = {n}: residual {res:e} exceeds 1e-12");
        }
    }

    #[test]
    fn quadrature_interval_length_n1() {
        let dim = Dimension::half_line();
        let grid = RadialGrid::new(0.0, 1.0, 11).unwrap();
        let ones = vec![1.0; grid.len()];
        let v = radial_quadrature(&grid, &ones, &dim).unwrap();
        assert!(close(v, 1.0, 1e-14));
    }

    #[test]
    fn quadrature_spherical_shell_volume() {
        // n = 3, f = 1 on [1, 2]: volume 4 pi (2^3 - 1) / 3.
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let grid = RadialGrid::new(1.0, 2.0, 11).unwrap();
        let ones = vec![1.0; grid.len()];
        let v = radial_quadrature(&grid, &ones, &dim).unwrap();
        let exact = 4.0 * PI * 7.0 / 3.0;
        assert!(close(v, exact, 1e-13), "got {v}, want {exact}");
    }

    #[test]
    fn quadrature_log_weight_n2() {
        // n = 2, f = 1/r on [1, e]: int (1/r) 2 pi r dr = 2 pi (e - 1).
        let dim = Dimension::exterior_ball(2, 1.0).unwrap();
        let grid = RadialGrid::new(1.0, std::f64::consts::E, 2001).unwrap();
        let f = grid.sample(|r| 1.0 / r);
        let v = radial_quadrature(&grid, &f, &dim).unwrap();
        let exact = 2.0 * PI * (std::f64::consts::E - 1.0);
        assert!(close(v, exact, 1e-7), "got {v}, want {exact}");
    }

    #[test]
    fn quadrature_second_order_convergence() {
        // Halving h reduces the error on a smooth integrand by ~4x.
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let exact = {
            // int_1^2 sin(r) r^2 dr * 4 pi, via antiderivative
            // -r^2 cos r + 2 r sin r + 2 cos r.
            let anti = |r: f64| -r * r * r.cos() + 2.0 * r * r.sin() + 2.0 * r.cos();
            4.0 * PI * (anti(2.0) - anti(1.0))
        };
        let err_at = |m: usize| {
            let grid = RadialGrid::new(1.0, 2.0, m).unwrap();
            let f = grid.sample(|r| r.sin());
            (radial_quadrature(&grid, &f, &dim).unwrap() - exact).abs()
        };
        let e1 = err_at(51);
        let e2 = err_at(101);
        let order = (e1 / e2).log2();
        assert!(order > 1.9, "observed order {order}");
    }

    #[test]
    fn truncated_quadrature_partial_cell() {
        let dim = Dimension::half_line();
        let grid = RadialGrid::new(0.0, 1.0, 11).unwrap();
        let f = grid.sample(|x| x);
        // int_0^0.55 x dx = 0.15125; 0.55 is mid-cell.
        let v = radial_quadrature_to(&grid, &f, &dim, 0.55).unwrap();
        assert!(close(v, 0.151_25, 1e-13));
        assert!(radial_quadrature_to(&grid, &f, &dim, 1.5).is_err());
    }

    #[test]
    fn horizon_grid_covers_support() {
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let g = RadialGrid::for_horizon(&dim, 3.0, 20.0, 1e-2).unwrap();
        assert!(g.rmax() >= 3.0 + 20.0 + 2e-2);
        assert!((g.h() - 1e-2).abs() < 1e-12);
    }

    proptest! {
        // Degree <= 1 polynomials in r (times the r^{n-1} weight) integrate
        // exactly up to rounding, for every dimension case.
        #[test]
        fn linear_integrands_are_exact(
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
            n in 1u32..=6,
            m in 3usize..200,
        ) {
            let dim = Dimension::new(n, 1.0).unwrap();
            let r0 = dim.boundary_radius().max(if n == 1 { 0.0 } else { 1.0 });
            let grid = RadialGrid::new(r0, r0 + 3.0, m).unwrap();
            let f = grid.sample(|r| a + b * r);
            let got = radial_quadrature(&grid, &f, &dim).unwrap();
            let lo = grid.r0();
            let hi = grid.rmax();
            let exact = dim.surface_weight()
                * (a * power_integral(lo, hi, n - 1) + b * power_integral(lo, hi, n));
            prop_assert!((got - exact).abs() <= 1e-11 * exact.abs().max(1.0),
                "got {}, want {}", got, exact);
        }
    }
}
