//! Problem data for the strongly damped semilinear wave equation on a
//! radial exterior domain: `u_tt - lap(u) - lap(u_t) = |u|^p` with
//! `u(0) = eps u0`, `u_t(0) = eps u1`, homogeneous Dirichlet boundary data,
//! and nonnegative profiles supported in the ball of radius `R`.

use std::error::Error;
use std::fmt;

use crate::grid::Dimension;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    ExponentNotAboveOne(f64),
    NonPositiveAmplitude(f64),
    /// Profile support must stay inside the ball of radius `R`.
    SupportExceedsR {
        support_end: f64,
        r: f64,
    },
    /// The obstacle must sit strictly inside the support ball.
    ObstacleOutsideSupport {
        r0: f64,
        r: f64,
    },
    BadProfile(String),
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::ExponentNotAboveOne(p) => write!(f, "p must exceed 1, got {p}"),
            ProblemError::NonPositiveAmplitude(e) => write!(f, "eps must be positive, got {e}"),
            ProblemError::SupportExceedsR { support_end, r } => write!(
                f,
                "profile support reaches {support_end} but must vanish for r >= {r}"
            ),
            ProblemError::ObstacleOutsideSupport { r0, r } => {
                write!(f, "need obstacle radius r0 = {r0} < support radius R = {r}")
            }
            ProblemError::BadProfile(msg) => write!(f, "invalid profile: {msg}"),
        }
    }
}

impl Error for ProblemError {}

/// Radial initial profile. The quartic bump
/// `(1 - ((r - center)/width)^2)_+^4` is C^3, nonnegative, and compactly
/// supported in `[center - width, center + width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Zero,
    QuarticBump { center: f64, width: f64 },
}

impl Profile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::QuarticBump { center, width } => {
                let s = (r - center) / width;
                let q = 1.0 - s * s;
                if q > 0.0 {
                    let q2 = q * q;
                    q2 * q2
                } else {
                    0.0
                }
            }
        }
    }

    /// Outer edge of the support (0 for the zero profile).
    pub fn support_end(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::QuarticBump { center, width } => center + width,
        }
    }

    fn validate(&self) -> Result<(), ProblemError> {
        if let Profile::QuarticBump { center, width } = *self {
            if !(width > 0.0) || !center.is_finite() {
                return Err(ProblemError::BadProfile(format!(
                    "quartic bump needs width > 0, got center = {center}, width = {width}"
                )));
            }
        }
        Ok(())
    }
}

/// A radial initial boundary value problem: geometry, nonlinearity exponent
/// `p > 1`, amplitude `eps > 0`, and nonnegative compactly supported
/// profiles `u0`, `u1` with support inside the ball of radius `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProblem {
    pub dim: Dimension,
    pub p: f64,
    pub eps: f64,
    pub u0: Profile,
    pub u1: Profile,
    /// Support radius: `u0`, `u1` vanish for `r >= R` and the solution stays
    /// supported in `B(t + R)`.
    pub support_radius: f64,
}

impl RadialProblem {
    pub fn new(
        dim: Dimension,
        p: f64,
        eps: f64,
        u0: Profile,
        u1: Profile,
        support_radius: f64,
    ) -> Result<Self, ProblemError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(ProblemError::ExponentNotAboveOne(p));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(ProblemError::NonPositiveAmplitude(eps));
        }
        if !(dim.boundary_radius() < support_radius) {
            return Err(ProblemError::ObstacleOutsideSupport {
                r0: dim.boundary_radius(),
                r: support_radius,
            });
        }
        u0.validate()?;
        u1.validate()?;
        for profile in [&u0, &u1] {
            let end = profile.support_end();
            if end > support_radius + 1e-12 {
                return Err(ProblemError::SupportExceedsR {
                    support_end: end,
                    r: support_radius,
                });
            }
        }
        Ok(RadialProblem {
            dim,
            p,
            eps,
            u0,
            u1,
            support_radius,
        })
    }

    /// Standard bump data filling `(r0, R)`: the quartic bump centered at
    /// `(r0 + R)/2` with half-width `(R - r0)/2`, used for both `u0` and
    /// `u1`.
    pub fn with_bump_data(
        dim: Dimension,
        p: f64,
        eps: f64,
        support_radius: f64,
    ) -> Result<Self, ProblemError> {
        let r0 = dim.boundary_radius();
        let bump = Profile::QuarticBump {
            center: 0.5 * (r0 + support_radius),
            width: 0.5 * (support_radius - r0),
        };
        RadialProblem::new(dim, p, eps, bump, bump, support_radius)
    }

    /// Support radius of the solution at time `t`: `t + R`.
    pub fn support_radius_at(&self, t: f64) -> f64 {
        t + self.support_radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_smooth_nonnegative_compact() {
        let b = Profile::QuarticBump {
            center: 2.0,
            width: 1.0,
        };
        assert_eq!(b.eval(1.0), 0.0);
        assert_eq!(b.eval(3.0), 0.0);
        assert_eq!(b.eval(3.5), 0.0);
        assert_eq!(b.eval(2.0), 1.0);
        // C^1 at the support edge: finite differences of the derivative
        // stay small across r = 3.
        let d = (b.eval(3.0 + 1e-6) - b.eval(3.0 - 1e-6)) / 2e-6;
        assert!(d.abs() < 1e-5);
        for i in 0..=100 {
            let r = 1.0 + 2.0 * i as f64 / 100.0;
            assert!(b.eval(r) >= 0.0);
        }
    }

    #[test]
    fn support_radius_examples() {
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        let pb = RadialProblem::with_bump_data(dim, 2.0, 1.0, 2.0).unwrap();
        assert_eq!(pb.support_radius_at(0.0), 2.0);
        assert_eq!(pb.support_radius_at(3.0), 5.0);
        let pb1 = RadialProblem::with_bump_data(dim, 2.0, 1.0, 1.0 + 1e-6);
        assert!(pb1.is_ok());
        let pb2 = RadialProblem::with_bump_data(Dimension::half_line(), 2.0, 1.0, 1.0).unwrap();
        assert_eq!(pb2.support_radius_at(10.0), 11.0);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let dim = Dimension::exterior_ball(3, 1.0).unwrap();
        assert!(matches!(
            RadialProblem::with_bump_data(dim, 0.5, 1.0, 3.0),
            Err(ProblemError::ExponentNotAboveOne(_))
        ));
        assert!(matches!(
            RadialProblem::with_bump_data(dim, 2.0, 0.0, 3.0),
            Err(ProblemError::NonPositiveAmplitude(_))
        ));
        assert!(matches!(
            RadialProblem::with_bump_data(dim, 2.0, 1.0, 0.5),
            Err(ProblemError::ObstacleOutsideSupport { .. })
        ));
        let wide = Profile::QuarticBump {
            center: 2.0,
            width: 2.0,
        };
        assert!(matches!(
            RadialProblem::new(dim, 2.0, 1.0, wide, Profile::Zero, 3.0),
            Err(ProblemError::SupportExceedsR { .. })
        ));
    }
}
