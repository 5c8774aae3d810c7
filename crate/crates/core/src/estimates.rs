//! Weighted space integrals of `psi1` over the truncated domain
//! `{r0 <= r <= t + R}` and empirical decay-rate fits.
//!
//! The two integrals are
//!
//! * the plain one, `int psi1^{p'} dx`,
//! * the weighted one, `int phi0^{-1/(p-1)} psi1^{p'} dx`,
//!
//! with `p' = p/(p-1)`. Both admit the power-law envelope
//! `C (t+R)^{n-1-(n-1)p'/2}`, the n = 2 refinement of the second being
//! `C (t+R)^{1-p'/2} (ln(t+R))^{-1/(p-1)}` for `t >= R1`. The integrands
//! are assembled in log space, `exp(p' (ln phi1 - t) - ln phi0/(p-1))`, so
//! they stay representable however large `phi1` grows. The weight
//! `phi0^{-1/(p-1)}` blows up at the boundary node while `psi1^{p'}`
//! vanishes there at higher order; the first cell is therefore integrated
//! with a midpoint evaluation instead of touching the 0 * inf endpoint.
//! (Dropping the first cell instead changes the values below tolerance;
//! the midpoint keeps the rule second order.)

use std::error::Error;
use std::fmt;

use crate::fit::linear_fit;
use crate::grid::RadialGrid;
use crate::testfn::{phi0_at, TestFunctionSet};

#[derive(Debug, Clone, PartialEq)]
pub enum EstimateError {
    /// `t + R` exceeds the sampled grid.
    DomainTooSmall {
        needed: f64,
        rmax: f64,
    },
    /// Fewer than 8 samples, or a sample span too narrow for a stable slope.
    SpanTooSmall {
        ratio: f64,
    },
    NotIncreasing,
    NonPositiveValue(f64),
}

impl fmt::Display for EstimateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateError::DomainTooSmall { needed, rmax } => {
                write!(
                    f,
                    "integration needs r <= {needed} but the grid ends at {rmax}"
                )
            }
            EstimateError::SpanTooSmall { ratio } => write!(
                f,
                "sample span ratio {ratio:.2} of t+R is too narrow for a slope fit"
            ),
            EstimateError::NotIncreasing => write!(f, "sample times must increase strictly"),
            EstimateError::NonPositiveValue(v) => {
                write!(f, "integral values must be positive, got {v}")
            }
        }
    }
}

impl Error for EstimateError {}

/// Theoretical envelope exponent `n - 1 - (n-1) p'/2`.
pub fn envelope_exponent(n: u32, p: f64) -> f64 {
    let nf = n as f64;
    let p_conj = p / (p - 1.0);
    nf - 1.0 - (nf - 1.0) * p_conj / 2.0
}

/// `int_{r0}^{t+R} psi1(., t)^{p'} dx`, computed in log space.
pub fn psi_integral(
    tf: &TestFunctionSet,
    p: f64,
    t: f64,
    support_radius: f64,
) -> Result<f64, EstimateError> {
    assert!(p > 1.0 && t >= 0.0);
    let p_conj = p / (p - 1.0);
    let rho = t + support_radius;
    let grid = &tf.grid;
    check_domain(grid, rho)?;
    let ln_integrand = |i: usize, _r: f64| p_conj * (tf.ln_phi1[i] - t);

    // First cell as a trapezoid with a zero left endpoint (the integrand
    // vanishes with phi1 at the boundary node).
    let h = grid.h();
    let dim = &tf.dim;
    let first_cell = if rho >= grid.node(1) {
        let v1 = ln_integrand(1, grid.node(1)).exp()
            * grid.node(1).powi(dim.n() as i32 - 1)
            * dim.surface_weight();
        0.5 * v1 * h
    } else {
        0.0
    };
    Ok(first_cell + trapezoid_from_node1(tf, rho, ln_integrand))
}

/// `int_{r0}^{t+R} phi0^{-1/(p-1)} psi1(., t)^{p'} dx` in log space, with
/// the boundary cell handled by a midpoint evaluation.
pub fn weighted_psi_integral(
    tf: &TestFunctionSet,
    p: f64,
    t: f64,
    support_radius: f64,
) -> Result<f64, EstimateError> {
    assert!(p > 1.0 && t >= 0.0);
    let p_conj = p / (p - 1.0);
    let q = 1.0 / (p - 1.0);

    let rho = t + support_radius;
    let grid = &tf.grid;
    check_domain(grid, rho)?;

    // First cell by the midpoint rule on the weighted integrand: phi1 at
    // the midpoint is half its value at node 1 to O(h^2) because it
    // vanishes linearly at the boundary.
    let h = grid.h();
    let dim = &tf.dim;
    let r_mid = grid.r0() + 0.5 * h;
    let phi1_mid = 0.5 * tf.phi1[1];
    let ln_mid = -q * phi0_at(dim, r_mid).ln() + p_conj * (phi1_mid.ln() - t);
    let w_mid = dim.surface_weight() * r_mid.powi(dim.n() as i32 - 1);
    let first_cell = ln_mid.exp() * w_mid * h.min(rho - grid.r0());

    // Remaining cells by the trapezoid rule on nodes 1..; the integrand is
    // smooth away from the boundary.
    let rest = trapezoid_from_node1(tf, rho, |i, r| {
        -q * phi0_at(dim, r).ln() + p_conj * (tf.ln_phi1[i] - t)
    });
    Ok(first_cell + rest)
}

fn check_domain(grid: &RadialGrid, rho: f64) -> Result<(), EstimateError> {
    if rho > grid.rmax() + 1e-9 * grid.h() {
        return Err(EstimateError::DomainTooSmall {
            needed: rho,
            rmax: grid.rmax(),
        });
    }
    Ok(())
}

/// Composite trapezoid of `exp(ln_integrand) * omega_n r^{n-1}` over the
/// cells from node 1 up to `rho` (the caller supplies the boundary cell,
/// whose handling differs between the two integrals).
fn trapezoid_from_node1(
    tf: &TestFunctionSet,
    rho: f64,
    ln_integrand: impl Fn(usize, f64) -> f64,
) -> f64 {
    let grid = &tf.grid;
    let dim = &tf.dim;
    let h = grid.h();
    let nm1 = dim.n() as i32 - 1;
    let omega = dim.surface_weight();
    let value_at = |i: usize| -> f64 {
        let r = grid.node(i);
        let ln = ln_integrand(i, r);
        // Far inside the domain the integrand underflows harmlessly.
        if ln < -700.0 {
            0.0
        } else {
            ln.exp() * r.powi(nm1)
        }
    };

    let mut total = 0.0;
    let mut i = 1usize;
    while i + 1 < grid.len() && grid.node(i + 1) <= rho + 1e-12 * h {
        total += 0.5 * (value_at(i) + value_at(i + 1)) * h;
        i += 1;
    }
    // Partial last cell up to rho, linear in the integrand.
    let r_i = grid.node(i);
    if rho > r_i && i + 1 < grid.len() {
        let frac = (rho - r_i) / h;
        let va = value_at(i);
        let vb = value_at(i + 1);
        let v_rho = va + (vb - va) * frac;
        total += 0.5 * (va + v_rho) * (rho - r_i);
    }
    omega * total
}

/// A decay fit of sampled integral values against the envelope
/// `(t+R)^exponent [ln(t+R)]^log_correction`.
#[derive(Debug, Clone)]
pub struct EstimateFit {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `ln value` (log-corrected when requested)
    /// against `ln(t+R)`.
    pub fitted_exponent: f64,
    /// Largest observed `value / bound`; doubles as the measured envelope
    /// constant.
    pub fitted_constant: f64,
    pub max_ratio: f64,
    /// Index at which the max ratio is attained.
    pub argmax_ratio: usize,
}

/// Fit the decay of `(t, value)` samples. `theory_exponent` and the
/// optional `log_correction` define the envelope that `max_ratio` is
/// measured against; `log_correction`, when present, is also subtracted
/// from the observations before the slope fit.
pub fn fit_decay(
    samples: &[(f64, f64)],
    support_radius: f64,
    theory_exponent: f64,
    log_correction: Option<f64>,
) -> Result<EstimateFit, EstimateError> {
    if samples.len() < 8 {
        return Err(EstimateError::SpanTooSmall {
            ratio: samples.len() as f64,
        });
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(EstimateError::NotIncreasing);
        }
    }
    for &(_, v) in samples {
        if !(v > 0.0) {
            return Err(EstimateError::NonPositiveValue(v));
        }
    }
    let shifted: Vec<f64> = samples.iter().map(|&(t, _)| t + support_radius).collect();
    // A slope over much less than a decade of t+R is ill-conditioned.
    let ratio = shifted[shifted.len() - 1] / shifted[0];
    if ratio < 8.0 {
        return Err(EstimateError::SpanTooSmall { ratio });
    }

    let xs: Vec<f64> = shifted.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = samples
        .iter()
        .zip(&xs)
        .map(|(&(_, v), &lx)| v.ln() - log_correction.unwrap_or(0.0) * lx.ln())
        .collect();
    let line = linear_fit(&xs, &ys).map_err(|_| EstimateError::SpanTooSmall { ratio })?;

    let mut max_ratio = f64::NEG_INFINITY;
    let mut argmax = 0usize;
    for (i, (&(_, v), &s)) in samples.iter().zip(&shifted).enumerate() {
        let bound = s.powf(theory_exponent) * s.ln().powf(log_correction.unwrap_or(0.0));
        let r = v / bound;
        if r > max_ratio {
            max_ratio = r;
            argmax = i;
        }
    }

    Ok(EstimateFit {
        ts: samples.iter().map(|&(t, _)| t).collect(),
        values: samples.iter().map(|&(_, v)| v).collect(),
        fitted_exponent: line.slope,
        fitted_constant: max_ratio,
        max_ratio,
        argmax_ratio: argmax,
    })
}

/// Evaluate both decay integrals over a time sweep. Returns
/// `(t, I_psi, I_w)` rows.
pub fn sweep(
    tf: &TestFunctionSet,
    p: f64,
    ts: &[f64],
    support_radius: f64,
) -> Result<Vec<(f64, f64, f64)>, EstimateError> {
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let i7 = psi_integral(tf, p, t, support_radius)?;
        let i8 = weighted_psi_integral(tf, p, t, support_radius)?;
        rows.push((t, i7, i8));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dimension;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn tf_for(n: u32, rmax: f64, h: f64) -> TestFunctionSet {
        let dim = Dimension::new(n, 1.0).unwrap();
        let grid = RadialGrid::with_spacing(dim.boundary_radius(), rmax, h).unwrap();
        TestFunctionSet::build(dim, grid).unwrap()
    }

    #[test]
    fn psi_integral_closed_form_n1() {
        // n = 1, p = 2: I_psi(t) = 2 e^{-2t} int_0^{t+R} sinh^2(x/sqrt2) dx
        //             = 2 e^{-2t} [ (sqrt2/4) sinh(sqrt2 X) - X/2 ],  X = t+R.
        let tf = tf_for(1, 14.0, 1e-3);
        let r = 2.0;
        for &t in &[0.0f64, 1.0, 5.0, 10.0] {
            let x = t + r;
            let exact = 2.0 * (-2.0 * t).exp() * ((SQRT2 / 4.0) * (SQRT2 * x).sinh() - x / 2.0);
            let got = psi_integral(&tf, 2.0, t, r).unwrap();
            assert!(
                (got - exact).abs() < 1e-6 * exact,
                "t = {t}: got {got}, want {exact}"
            );
        }
    }

    #[test]
    fn psi_integral_positive_at_start() {
        let tf = tf_for(3, 10.0, 2e-3);
        let v = psi_integral(&tf, 2.0, 0.0, 2.0).unwrap();
        assert!(v > 0.0 && v.is_finite());
    }

    #[test]
    fn domain_too_small_is_reported() {
        let tf = tf_for(3, 10.0, 2e-3);
        assert!(matches!(
            psi_integral(&tf, 2.0, 20.0, 2.0),
            Err(EstimateError::DomainTooSmall { .. })
        ));
    }

    #[test]
    fn weighted_integral_dominates_plain_when_phi0_below_one() {
        // n >= 3 keeps phi0 < 1, so the extra weight is >= 1 pointwise.
        let tf = tf_for(3, 30.0, 2e-3);
        for &t in &[0.0, 2.0, 10.0, 25.0] {
            let plain = psi_integral(&tf, 2.0, t, 2.0).unwrap();
            let weighted = weighted_psi_integral(&tf, 2.0, t, 2.0).unwrap();
            assert!(weighted >= plain, "t = {t}: {weighted} < {plain}");
        }
    }

    #[test]
    fn integrals_stable_under_refinement() {
        // Halving h changes either integral by well under 1%.
        let coarse = tf_for(3, 20.0, 4e-3);
        let fine = tf_for(3, 20.0, 2e-3);
        for &t in &[1.0, 8.0, 15.0] {
            let a7 = psi_integral(&coarse, 2.0, t, 2.0).unwrap();
            let b7 = psi_integral(&fine, 2.0, t, 2.0).unwrap();
            assert!((a7 - b7).abs() < 1e-2 * b7);
            let a8 = weighted_psi_integral(&coarse, 2.0, t, 2.0).unwrap();
            let b8 = weighted_psi_integral(&fine, 2.0, t, 2.0).unwrap();
            assert!((a8 - b8).abs() < 1e-2 * b8);
        }
    }

    #[test]
    fn fit_decay_recovers_synthetic_power_law() {
        let r = 2.0;
        let samples: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let t = 1.0 + 99.0 * i as f64 / 19.0;
                (t, 3.0 * (t + r).powf(-1.5))
            })
            .collect();
        let fit = fit_decay(&samples, r, -1.5, None).unwrap();
        assert!((fit.fitted_exponent + 1.5).abs() < 1e-6);
        assert!((fit.max_ratio - 3.0).abs() < 1e-9);
    }

    #[test]
    fn fit_decay_with_log_correction() {
        let r = 2.0;
        let samples: Vec<(f64, f64)> = (0..24)
            .map(|i| {
                let t = 2.0 + 198.0 * i as f64 / 23.0;
                let s = t + r;
                (t, 0.7 * s.powf(-1.0) * s.ln().powf(-2.0))
            })
            .collect();
        let fit = fit_decay(&samples, r, -1.0, Some(-2.0)).unwrap();
        assert!((fit.fitted_exponent + 1.0).abs() < 1e-3);
        assert!((fit.max_ratio - 0.7).abs() < 1e-9);
    }

    #[test]
    fn fit_decay_constant_samples() {
        let samples: Vec<(f64, f64)> = (0..12)
            .map(|i| (1.0 + 99.0 * i as f64 / 11.0, 4.2))
            .collect();
        let fit = fit_decay(&samples, 1.0, 0.0, None).unwrap();
        assert!(fit.fitted_exponent.abs() < 1e-12);
    }

    #[test]
    fn fit_decay_rejects_narrow_spans() {
        let samples: Vec<(f64, f64)> = (0..10).map(|i| (10.0 + i as f64 * 0.1, 1.0)).collect();
        assert!(matches!(
            fit_decay(&samples, 1.0, 0.0, None),
            Err(EstimateError::SpanTooSmall { .. })
        ));
        let few: Vec<(f64, f64)> = (0..5).map(|i| (1.0 + i as f64 * 30.0, 1.0)).collect();
        assert!(fit_decay(&few, 1.0, 0.0, None).is_err());
    }

    #[test]
    fn envelope_exponent_values() {
        assert_eq!(envelope_exponent(1, 2.0), 0.0);
        assert_eq!(envelope_exponent(3, 2.0), 0.0);
        let pc2 = crate::grid::strauss_exponent(2).unwrap();
        let e = envelope_exponent(2, pc2);
        assert!((e - 0.304_806).abs() < 1e-5, "got {e}");
    }
}
