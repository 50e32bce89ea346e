//! Maximum-principle checks on computed trajectories.

use serde::{Deserialize, Serialize};

use crate::solver::trajectory::Trajectory;

/// Absolute undershoot allowed below zero. The principles hold exactly for
/// the PDE; discretization can dip slightly under.
pub const NEGATIVITY_TOL: f64 = 1e-8;

/// Sign information about the data of a run, supplied by the caller.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MpContext {
    /// `y0 ≥ 0`.
    pub y0_nonneg: bool,
    /// `y0 ≢ 0` (needed for the strong principle).
    pub y0_nonzero: bool,
    /// Additive sources, if any, are nonnegative (`true` when there are none).
    pub source_nonneg: bool,
    /// No additive source at all (the weak upper bound needs `u ≡ 0`).
    pub source_absent: bool,
    /// Reaction coefficient `v ≤ 0` everywhere (`true` when there is none).
    pub reaction_nonpositive: bool,
    /// `max{ sup (y(0,·))⁺, sup (y(1,·))⁺, sup (y0)⁺ }`.
    pub sup_data: f64,
}

/// Observational report; nothing here fails a run by itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    /// Minimum over space-time.
    pub min_value: f64,
    /// Weak principle i): applicable and satisfied (`None` = not applicable).
    pub weak_lower_ok: Option<bool>,
    /// Maximum over space-time.
    pub max_value: f64,
    /// Ceiling `K` from the data.
    pub bound_k: f64,
    /// Weak principle ii): `y ≤ K + tol` (`None` = not applicable).
    pub weak_upper_ok: Option<bool>,
    /// Per-snapshot interior minimum for `t > 0`.
    pub interior_min: Vec<(f64, f64)>,
    /// Strong principle iii): interior values strictly positive for all
    /// `t > 0` (`None` = not applicable).
    pub strict_positive: Option<bool>,
}

/// Evaluates principles i)-iii) against a computed trajectory.
pub fn maximum_principle_report(traj: &Trajectory, ctx: &MpContext) -> MaxPrincipleReport {
    let min_value = traj.diagnostics.min_value;
    let max_value = traj.diagnostics.max_value;

    let weak_lower_ok = if ctx.y0_nonneg && ctx.source_nonneg {
        Some(min_value >= -NEGATIVITY_TOL)
    } else {
        None
    };

    let weak_upper_ok = if ctx.source_absent && ctx.reaction_nonpositive {
        Some(max_value <= ctx.sup_data + NEGATIVITY_TOL)
    } else {
        None
    };

    let mut interior_min = Vec::new();
    for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
        if *t <= 0.0 {
            continue;
        }
        let v = snap.values();
        let m = v[1..v.len() - 1].iter().copied().fold(f64::INFINITY, f64::min);
        interior_min.push((*t, m));
    }
    let strict_positive = if ctx.y0_nonneg
        && ctx.y0_nonzero
        && ctx.source_nonneg
        && ctx.reaction_nonpositive
        && !interior_min.is_empty()
    {
        Some(interior_min.iter().all(|(_, m)| *m > 0.0))
    } else {
        None
    };

    MaxPrincipleReport {
        min_value,
        weak_lower_ok,
        max_value,
        bound_k: ctx.sup_data,
        weak_upper_ok,
        interior_min,
        strict_positive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GridFunction, Interval};
    use crate::solver::cn::{evolve_multiplicative, CnOptions, ReactionWindow};
    use std::f64::consts::PI;

    #[test]
    fn damped_sine_respects_both_weak_bounds() {
        // y0 = sin(πx), v = -5 on (0, 0.4): min ≥ -tol, max ≤ 1
        let y0 = GridFunction::from_fn(257, |x| (PI * x).sin());
        let w = ReactionWindow::uniform(0.0, 0.1, -5.0, Interval::new(0.0, 0.4).unwrap()).unwrap();
        let traj =
            evolve_multiplicative(&y0, &[w], 0.1, &CnOptions { dt: 1e-4, ..Default::default() })
                .unwrap();
        let ctx = MpContext {
            y0_nonneg: true,
            y0_nonzero: true,
            source_nonneg: true,
            source_absent: true,
            reaction_nonpositive: true,
            sup_data: 1.0,
        };
        let rep = maximum_principle_report(&traj, &ctx);
        assert_eq!(rep.weak_lower_ok, Some(true));
        assert_eq!(rep.weak_upper_ok, Some(true));
        assert!(rep.min_value >= -1e-10);
        assert!(rep.max_value <= 1.0 + 1e-10);
    }

    #[test]
    fn zero_run_trivially_passes() {
        let y0 = GridFunction::zeros(65);
        let traj =
            evolve_multiplicative(&y0, &[], 0.01, &CnOptions { dt: 1e-4, ..Default::default() })
                .unwrap();
        let ctx = MpContext {
            y0_nonneg: true,
            y0_nonzero: false,
            source_nonneg: true,
            source_absent: true,
            reaction_nonpositive: true,
            sup_data: 0.0,
        };
        let rep = maximum_principle_report(&traj, &ctx);
        assert_eq!(rep.weak_lower_ok, Some(true));
        assert_eq!(rep.weak_upper_ok, Some(true));
        assert_eq!(rep.strict_positive, None); // y0 ≡ 0: strong form not applicable
    }

    #[test]
    fn strict_positivity_spreads_from_a_bump() {
        // y0 a bump on (0.1, 0.2), v = -100 on (0.5, 0.9): by t = 0.01 the
        // whole interior is strictly positive. Monotone steps keep the
        // discrete scheme sign-preserving.
        let y0 = GridFunction::from_fn(257, |x| {
            let s: f64 = (x - 0.15) / 0.05;
            if s.abs() < 1.0 {
                (1.0 - s * s).powi(3)
            } else {
                0.0
            }
        });
        let w = ReactionWindow::uniform(0.0, 0.01, -100.0, Interval::new(0.5, 0.9).unwrap()).unwrap();
        let opts = CnOptions { dt: 1e-4, monotone: true, ..Default::default() };
        let traj = evolve_multiplicative(&y0, &[w], 0.01, &opts).unwrap();
        let ctx = MpContext {
            y0_nonneg: true,
            y0_nonzero: true,
            source_nonneg: true,
            source_absent: true,
            reaction_nonpositive: true,
            sup_data: 1.0,
        };
        let rep = maximum_principle_report(&traj, &ctx);
        assert_eq!(rep.strict_positive, Some(true), "interior minima: {:?}", rep.interior_min);
    }
}
