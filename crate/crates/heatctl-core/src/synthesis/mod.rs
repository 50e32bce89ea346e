//! Constructive steering controls.
//!
//! The constructions build on one another in increasing generality:
//!
//! 1. [`pulse`]: a single terminal pulse `u = (1/δ) ŷ_d(x)` on a short
//!    window steers the zero state to `ŷ_d` with an error given exactly by
//!    a closed form, monotone in `δ`;
//! 2. [`mobile`]: a target of full support is split into `M = ⌈1/l⌉`
//!    pieces and steered piece by piece with nested pulse widths while the
//!    support slides across the domain;
//! 3. [`lift`]: any nonnegative additive control over a strictly positive
//!    state converts to a bounded multiplicative control via `v = u/y`;
//! 4. [`damping`]: large negative reaction coefficients swept window by
//!    window crush the uncontrolled background below a norm threshold,
//!    with measured certificates for every inequality along the way;
//! 5. [`multiplicative`]: damping followed by a lifted mobile plan steers
//!    the bilinear system to an arbitrary nonnegative target.

pub mod damping;
pub mod lift;
pub mod mobile;
pub mod multiplicative;
pub mod pulse;

pub use damping::{damping_sweep, DampingCertificate, DampingOptions, DampingStage, DampingSweep};
pub use lift::{lift_to_multiplicative, LiftAnchor, LiftOptions, LiftedControl};
pub use mobile::{synthesize_mobile_additive, MobilePlan, SynthesisOptions};
pub use multiplicative::{synthesize_multiplicative_mobile, MultiplicativePlan, PipelineOptions};
pub use pulse::{
    build_pulse_control, choose_delta, predict_pulse_error, predict_pulse_error_l2, psi, psi_hat,
    PulseControl, PulseVariant,
};
