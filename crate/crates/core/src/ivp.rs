//! Adaptive embedded Runge-Kutta stepping for the two-dimensional initial
//! value problems used by the test-function builder and the comparison-ODE
//! integrator: the Dormand-Prince 5(4) pair with a standard step-size
//! controller and cubic-Hermite dense output between accepted steps.

use std::error::Error;
use std::fmt;

pub type State2 = [f64; 2];

/// One accepted step, carrying enough information for Hermite interpolation
/// on `[t0, t1]`.
#[derive(Debug, Clone, Copy)]
pub struct AcceptedStep {
    pub t0: f64,
    pub y0: State2,
    pub f0: State2,
    pub t1: f64,
    pub y1: State2,
    pub f1: State2,
}

impl AcceptedStep {
    /// Cubic Hermite interpolant using the stepper's derivative output at
    /// both step ends.
    pub fn interpolate(&self, t: f64) -> State2 {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut out = [0.0; 2];
        for k in 0..2 {
            out[k] =
                h00 * self.y0[k] + h10 * h * self.f0[k] + h01 * self.y1[k] + h11 * h * self.f1[k];
        }
        out
    }
}

/// Caller verdict after each accepted step.
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IvpOutcome {
    /// Reached the end of the requested interval.
    ReachedEnd,
    /// Caller requested an early stop.
    Stopped,
    /// Step size underflowed below `min_step` while the error control kept
    /// rejecting; the trajectory beyond this point is unreliable.
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IvpError {
    NonFiniteState { t: f64 },
    BadInterval { t0: f64, t_end: f64 },
}

impl fmt::Display for IvpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IvpError::NonFiniteState { t } => write!(f, "state became non-finite at t = {t}"),
            IvpError::BadInterval { t0, t_end } => {
                write!(f, "integration interval [{t0}, {t_end}] is empty")
            }
        }
    }
}

impl Error for IvpError {}

/// Dormand-Prince 5(4) with proportional step control.
#[derive(Debug, Clone, Copy)]
pub struct DormandPrince54 {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub initial_step: f64,
}

impl Default for DormandPrince54 {
    fn default() -> Self {
        DormandPrince54 {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            initial_step: 1e-3,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order weights (row 7 of A, FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Embedded fourth-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl DormandPrince54 {
    /// Integrate `y' = f(t, y)` from `(t0, y0)` towards `t_end`, invoking
    /// `on_step` after every accepted step. Returns the final state and why
    /// integration ended.
    pub fn integrate<F, G>(
        &self,
        f: F,
        t0: f64,
        y0: State2,
        t_end: f64,
        mut on_step: G,
    ) -> Result<(f64, State2, IvpOutcome, usize), IvpError>
    where
        F: Fn(f64, &State2) -> State2,
        G: FnMut(&AcceptedStep) -> Control,
    {
        if !(t_end > t0) {
            return Err(IvpError::BadInterval { t0, t_end });
        }
        let mut t = t0;
        let mut y = y0;
        let mut dy = f(t, &y);
        let mut h = self.initial_step.min(self.max_step).min(t_end - t0);
        let mut steps = 0usize;
        let mut k = [[0.0f64; 2]; 7];

        while t < t_end {
            // The effective floor scales with t: near a blow-up time the
            // useful steps shrink towards the spacing of representable
            // times, and an absolute floor would stop too early.
            let min_step = self.min_step.max(32.0 * f64::EPSILON * t.abs().max(1.0));
            h = h.min(t_end - t).min(self.max_step);
            if h < min_step {
                return Ok((t, y, IvpOutcome::StepUnderflow, steps));
            }

            k[0] = dy;
            for stage in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        ys[0] += h * a * kj[0];
                        ys[1] += h * a * kj[1];
                    }
                }
                k[stage] = f(t + C[stage] * h, &ys);
            }

            let mut y5 = y;
            let mut err = [0.0f64; 2];
            for (j, kj) in k.iter().enumerate() {
                y5[0] += h * B5[j] * kj[0];
                y5[1] += h * B5[j] * kj[1];
                let e = B5[j] - B4[j];
                err[0] += h * e * kj[0];
                err[1] += h * e * kj[1];
            }

            if !y5[0].is_finite() || !y5[1].is_finite() {
                // Overshot into overflow; retry with a smaller step.
                h *= 0.25;
                if h < min_step {
                    return Ok((t, y, IvpOutcome::StepUnderflow, steps));
                }
                continue;
            }

            let mut err_norm = 0.0f64;
            for i in 0..2 {
                let scale = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                err_norm = err_norm.max((err[i] / scale).abs());
            }

            if err_norm <= 1.0 {
                let step = AcceptedStep {
                    t0: t,
                    y0: y,
                    f0: k[0],
                    t1: t + h,
                    y1: y5,
                    f1: k[6],
                };
                t += h;
                y = y5;
                dy = k[6]; // FSAL
                steps += 1;
                if let Control::Stop = on_step(&step) {
                    return Ok((t, y, IvpOutcome::Stopped, steps));
                }
                let factor = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= factor;
            } else {
                h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        Ok((t, y, IvpOutcome::ReachedEnd, steps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_accurate() {
        let solver = DormandPrince54 {
            rtol: 1e-10,
            atol: 1e-14,
            ..Default::default()
        };
        let (t, y, outcome, _) = solver
            .integrate(
                |_, y| [-y[0], -y[1]],
                0.0,
                [1.0, 2.0],
                5.0,
                |_| Control::Continue,
            )
            .unwrap();
        assert_eq!(outcome, IvpOutcome::ReachedEnd);
        assert_eq!(t, 5.0);
        let exact = (-5.0f64).exp();
        assert!((y[0] - exact).abs() < 1e-10);
        assert!((y[1] - 2.0 * exact).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_phase() {
        let solver = DormandPrince54 {
            rtol: 1e-11,
            atol: 1e-14,
            ..Default::default()
        };
        let (_, y, _, _) = solver
            .integrate(
                |_, y| [y[1], -y[0]],
                0.0,
                [1.0, 0.0],
                10.0,
                |_| Control::Continue,
            )
            .unwrap();
        assert!((y[0] - 10.0f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10.0f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn hermite_dense_output_matches_sinh() {
        // y = [sinh, cosh]; mid-step interpolants carry the O(step^4)
        // Hermite error, ~ (0.05^4/384) sinh(3) here.
        let solver = DormandPrince54 {
            rtol: 1e-10,
            atol: 1e-14,
            max_step: 0.05,
            ..Default::default()
        };
        let mut max_err = 0.0f64;
        solver
            .integrate(
                |_, y| [y[1], y[0]],
                0.0,
                [0.0, 1.0],
                3.0,
                |step| {
                    let tm = 0.5 * (step.t0 + step.t1);
                    let y = step.interpolate(tm);
                    max_err = max_err.max((y[0] - tm.sinh()).abs());
                    Control::Continue
                },
            )
            .unwrap();
        assert!(max_err < 5e-7, "mid-step error {max_err}");
    }

    #[test]
    fn early_stop_is_reported() {
        let solver = DormandPrince54::default();
        let (t, _, outcome, _) = solver
            .integrate(
                |_, y| [y[0], y[1]],
                0.0,
                [1.0, 1.0],
                100.0,
                |step| {
                    if step.y1[0] > 10.0 {
                        Control::Stop
                    } else {
                        Control::Continue
                    }
                },
            )
            .unwrap();
        assert_eq!(outcome, IvpOutcome::Stopped);
        assert!(t < 100.0);
    }
}
