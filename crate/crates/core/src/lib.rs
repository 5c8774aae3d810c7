//! Numerical laboratory for finite-time blow-up of the strongly damped
//! semilinear wave equation `u_tt - lap(u) - lap(u_t) = |u|^p` on radial
//! exterior domains (half-line for n = 1, exterior of a ball for n >= 2).
//!
//! The crate is organized around the ingredients of the test-function
//! method:
//!
//! * [`grid`] - radial grids, the n-dimensional surface measure, weighted
//!   quadrature, and the critical (Strauss) exponent.
//! * [`problem`] - problem data: dimension/geometry, nonlinearity exponent,
//!   amplitude, and compactly supported radial initial profiles.
//! * [`testfn`] - the harmonic weight `phi0`, the eigenfunction `phi1`
//!   (`lap(phi1) = phi1/2`), and the space-time weight
//!   `psi1(x,t) = phi1(x) e^{-t}`.
//! * [`estimates`] - weighted space integrals of `psi1` and their decay-rate
//!   fits.
//! * [`ode`] - Sideris-type comparison ODEs `F'' = k w(t) F^p`, blow-up
//!   detection, blow-up time extrapolation, and parameter-space scans.
//! * [`solver`] - a method-of-lines simulator for the PDE, semi-implicit in
//!   both Laplacian terms, explicit in the nonlinearity.
//! * [`diagnostics`] - the functionals `F0 = int u phi0` and
//!   `F1 = int u psi1`, their differential identities and lower bounds, and
//!   blow-up time extrapolation from traces.
//!
//! All computations are deterministic: no randomness, no time-dependent
//! state, and a fixed order of floating-point operations for a given input.

pub mod diagnostics;
pub mod estimates;
pub mod fit;
pub mod grid;
pub mod ivp;
pub mod ode;
pub mod problem;
pub mod solver;
pub mod testfn;

pub use crate::grid::{strauss_exponent, Dimension, RadialGrid};
pub use crate::problem::{Profile, RadialProblem};
pub use crate::testfn::TestFunctionSet;
