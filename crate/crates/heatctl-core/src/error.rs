//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by constructors, solvers and synthesis routines.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A value failed a domain precondition (range, sign, finiteness).
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    /// Requested mode count collides with the grid Nyquist limit.
    #[error("k_max = {k_max} aliases on a grid of {n_points} points (need k_max < n_points - 1)")]
    AliasingLimit { k_max: usize, n_points: usize },

    /// Time windows overlap or are out of order.
    #[error("control windows overlap near t = {t}")]
    WindowOverlap { t: f64 },

    /// A spatial profile carries mass outside its declared support.
    #[error("profile mass {mass:.3e} outside declared support ({lo}, {hi})")]
    SupportViolation { mass: f64, lo: f64, hi: f64 },

    /// Mollification could not reach the requested tolerance on this grid.
    #[error("mollification stalled: bound {achieved:.3e} > tol {tol:.3e} at margin {margin:.3e} (grid too coarse)")]
    MollifyFailure { achieved: f64, tol: f64, margin: f64 },

    /// The halving search for a pulse width exhausted its iteration cap.
    #[error("pulse-width search exhausted after {halvings} halvings (predicted error {achieved:.3e} > {epsilon:.3e}); epsilon is below the mode-truncation floor")]
    DeltaSearchFailure { halvings: u32, achieved: f64, epsilon: f64 },

    /// The state is too small on the lift set to divide by.
    #[error("degenerate state: min y = {rho:.3e} on the active set, below floor {floor:.3e}; cannot form v = u/y")]
    DegenerateState { rho: f64, floor: f64 },

    /// No damping rate in the scan grid met a window criterion in time.
    #[error("damping sweep stalled in window {window}: best norm {achieved:.3e} > threshold {threshold:.3e} within the time budget")]
    SweepFailure { window: usize, achieved: f64, threshold: f64 },

    /// A multi-stage pipeline failed; carries the stage name.
    #[error("stage `{stage}` failed: {source}")]
    StageFailure {
        stage: &'static str,
        #[source]
        source: Box<CoreError>,
    },
}

impl CoreError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CoreError::InvalidArgument { name, reason: reason.into() }
    }

    pub(crate) fn in_stage(stage: &'static str, source: CoreError) -> Self {
        CoreError::StageFailure { stage, source: Box::new(source) }
    }
}

pub type CoreResult<T> = Result<T, CoreError>;
