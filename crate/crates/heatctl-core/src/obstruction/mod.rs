//! Duality certificates for the negative results.
//!
//! The positive constructions have a hard boundary: with a *static*
//! support, and likewise with nonnegative boundary data, some nonnegative
//! targets stay unreachable no matter the control. Each certificate here
//! is an explicit classical solution `p` of a backward heat problem whose
//! pairing with every reachable final state has a fixed sign. Evaluating
//! the pairing on simulated trajectories gives a numeric proof object:
//!
//! - the integration-by-parts identity `lhs = rhs` must close to rounding
//!   (anything else means the simulation and the closed forms disagree),
//! - the sign of the pairing must match,
//! - combined with Cauchy-Schwarz, the pairing yields an explicit lower
//!   bound on the distance from every reachable state to the bad target.
//!
//! The strip argument for the bilinear system needs no adjoint at all: on
//! an interval the control never touches, the state dominates the
//! solution of the homogeneous Dirichlet problem there, whose final norm
//! is a computable floor.

pub(crate) mod boundary;
pub(crate) mod p1;
pub(crate) mod sampling;
pub(crate) mod static_adjoint;
pub(crate) mod strip;

pub use boundary::{
    boundary_gap_lower_bound, boundary_obstruction_suite, boundary_pairing, BoundaryAdjoint,
};
pub use p1::{check_p1_bounds, p1_suite, P1Options, P1Report};
pub use sampling::{
    random_boundary_signal, random_reaction_windows, random_smooth_nonneg, random_source_windows,
};
pub use static_adjoint::{
    build_static_adjoint, duality_pairing_static, static_obstruction_suite, unreachability_gap,
    StaticAdjoint,
};
pub use strip::{
    strip_floor, strip_obstruction_suite, verify_strip_obstruction, StripReport, StripSample,
};

use serde::{Deserialize, Serialize};

/// One control sample paired against an adjoint certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub sample_id: u64,
    /// `∫ y(T) p(·,T) dx` plus the interior coupling term where present.
    pub lhs: f64,
    /// The control-side integral `∬ u p`.
    pub rhs: f64,
    /// `|lhs - rhs|`.
    pub residual: f64,
    /// `‖y(·,T) - y_d‖_{L²}` against the certificate's unreachable target.
    pub distance: f64,
    pub pass: bool,
}

/// Aggregated outcome of a randomized obstruction run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObstructionReport {
    /// Cauchy-Schwarz floor on `‖y(T) - y_d‖` for every admissible run.
    pub gap_lower_bound: f64,
    pub identity_tol: f64,
    pub pairing_tol: f64,
    pub samples: Vec<SampleOutcome>,
}

impl ObstructionReport {
    pub fn all_pass(&self) -> bool {
        self.samples.iter().all(|s| s.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.residual))
    }

    pub fn max_pairing(&self) -> f64 {
        self.samples.iter().fold(f64::NEG_INFINITY, |m, s| m.max(s.rhs))
    }

    pub fn min_distance(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, s| m.min(s.distance))
    }
}
