//! Spatial representations of states on the unit interval.
//!
//! Two representations coexist and convert into each other:
//!
//! - [`GridFunction`]: samples on the uniform grid `x_i = i/(n-1)`, the
//!   physical-space form used by the finite-difference solver, pointwise
//!   checks and quadrature;
//! - [`SineSeries`]: coefficients `a_k` of `y(x) = 2 Σ_k a_k sin(kπx)`,
//!   the spectral form in which the exact steppers and the closed-form
//!   steering-error formulas live.
//!
//! The module also carries the support bookkeeping used by the mobile
//! constructions: intervals, piecewise-constant support schedules, and the
//! decomposition of a target into pieces of width at most `l` together with
//! their smooth interior cutoffs.

pub(crate) mod grid;
pub(crate) mod series;
pub(crate) mod target;

pub use grid::{GridFunction, Interval};
pub use series::{project_to_sine, SineSeries};
pub use target::{
    decompose_target, mollify_piece, MollifiedPiece, Piece, SupportSchedule, TargetDecomposition,
};
