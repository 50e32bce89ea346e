//! Forward evolution of the controlled systems.
//!
//! Two backends cover everything the constructions need:
//!
//! - an **exact spectral stepper** for the additive system and free decay
//!   (the separation-of-variables formulas are closed-form whenever the
//!   source is piecewise constant in time, which every construction here
//!   satisfies), plus the transposition series for boundary data;
//! - a **Crank-Nicolson** grid stepper for the multiplicative system with a
//!   general reaction coefficient, reaction treated implicitly.
//!
//! Both produce a [`Trajectory`]: snapshots on an evaluation grid with
//! min/max/L² diagnostics, and (for spectral runs) the exact final mode
//! coefficients.

pub(crate) mod boundary;
pub(crate) mod cn;
pub(crate) mod max_principle;
pub(crate) mod spectral;
pub(crate) mod trajectory;

pub use boundary::{evolve_boundary, BoundaryEvolution, BoundarySignal, BoundaryWindow};
pub use cn::{evolve_multiplicative, CnOptions, CnStepper, ReactionCoefficient, ReactionWindow};
pub use max_principle::{maximum_principle_report, MaxPrincipleReport, MpContext, NEGATIVITY_TOL};
pub use spectral::{
    evolve_additive, evolve_free, additive_segments, ModeSegment, SourceWindow, SpectralOptions,
};
pub use trajectory::{snapshot_times, Diagnostics, Trajectory};
