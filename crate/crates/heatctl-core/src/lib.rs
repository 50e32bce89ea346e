//! Numerical laboratory for one-dimensional heat-equation control.
//!
//! The crate simulates three controlled systems on the unit interval with
//! homogeneous (or controlled) Dirichlet data,
//!
//! - an additive source acting on a moving subinterval,
//!   `y_t = y_xx + u(x,t) χ_{ω(t)}(x)`,
//! - a multiplicative (bilinear) reaction coefficient,
//!   `y_t = y_xx + v(x,t) y χ_{ω(t)}(x)`,
//! - boundary injection, `y_t = y_xx`, `y(0,t) = u0(t)`, `y(1,t) = u1(t)`,
//!
//! and provides two kinds of machinery on top of the solvers:
//!
//! - **synthesis**: constructive steering controls (terminal pulses with
//!   closed-form error formulas, mobile-support pulse trains, the bilinear
//!   lift `v = u/y`, and window-by-window damping sweeps), and
//! - **certificates**: explicit adjoint solutions whose duality pairings
//!   certify that certain nonnegative targets are unreachable when the
//!   control support is static or the control enters through the boundary.
//!
//! States are carried either as grid samples ([`field::GridFunction`]) or as
//! sine-series coefficients ([`field::SineSeries`]) in the convention
//! `y(x) = 2 Σ_k a_k sin(kπx)`.

pub mod error;
pub mod field;
pub mod numerics;
pub mod obstruction;
pub mod solver;
pub mod synthesis;

pub use error::{CoreError, CoreResult};
pub use field::{GridFunction, Interval, SineSeries, SupportSchedule, TargetDecomposition};
pub use solver::{BoundarySignal, ReactionWindow, SourceWindow, Trajectory};
