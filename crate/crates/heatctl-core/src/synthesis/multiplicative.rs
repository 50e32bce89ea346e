//! End-to-end multiplicative mobile synthesis: damping sweep, then a
//! lifted mobile additive plan on the remaining horizon.
//!
//! Stage 1 drives the background `‖y_M(·,T_M)‖` under `ε/2`; its free
//! evolution contributes at most that much at the final time. Stage 2
//! synthesizes a mobile additive plan of budget `ε/2` for the target on
//! `(T_M, T)` and lifts it over the damped residue, so the assembled
//! coefficient is `-m_j` on the sweep windows and `u/y` on the pulse
//! windows. The final error obeys the triangle bound
//! `‖y(·,T) - y_d‖ ≤ ‖ŷ₂(·,T) - (y_d + ŷ₁(·,T))‖ + ‖ŷ₁(·,T)‖`,
//! and both terms are measured.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::{project_to_sine, GridFunction, SineSeries, SupportSchedule};
use crate::solver::{evolve_free, ReactionWindow, SourceWindow};
use crate::synthesis::damping::{damping_sweep, DampingOptions, DampingSweep};
use crate::synthesis::lift::{lift_to_multiplicative, LiftOptions, LiftedControl};
use crate::synthesis::mobile::{synthesize_mobile_additive, MobilePlan, SynthesisOptions};

/// Options of the two stages plus the lift.
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub damping: DampingOptions,
    pub synthesis: SynthesisOptions,
    pub lift: LiftOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            damping: DampingOptions::default(),
            synthesis: SynthesisOptions::default(),
            // after a full sweep the free part of the residue is tiny near
            // the support fringes; it is still a certified positive floor,
            // so the pipeline tolerates much smaller denominators than a
            // stand-alone lift would
            lift: LiftOptions { floor_rho: 1e-12, ..LiftOptions::default() },
        }
    }
}

/// The assembled plan with its measured error decomposition.
#[derive(Debug, Clone)]
pub struct MultiplicativePlan {
    pub epsilon: f64,
    pub t_final: f64,
    pub length_l: f64,
    /// Stage 1: the committed damping sweep on `[0, T_M]`.
    pub damping: DampingSweep,
    /// Stage 2: the mobile additive plan on the shifted clock `[0, T-T_M]`.
    pub stage2: MobilePlan,
    /// The lift of stage 2 over the damped residue (shifted clock).
    pub lift: LiftedControl,
    /// Support schedule over the whole of `[0, T]`.
    pub schedule: SupportSchedule,
    /// `ŷ₁(·,T)`: free evolution of the residue, in mode space.
    pub residue_free_final: SineSeries,
    /// `‖ŷ₁(·,T)‖`.
    pub residue_norm: f64,
    /// `‖ŷ₂(·,T) - (y_d + ŷ₁(·,T))‖`: the stage-2 steering error.
    pub stage2_error: f64,
    /// `‖y(·,T) - y_d‖`, the quantity the construction promises `≤ ε`.
    pub total_error: f64,
    /// Final state of the assembled run on the synthesis grid.
    pub final_state: GridFunction,
}

impl MultiplicativePlan {
    /// Reaction windows of stage 1, absolute times.
    pub fn damping_windows(&self) -> Vec<ReactionWindow> {
        self.damping.reaction_windows()
    }

    /// Additive windows of stage 2 shifted to absolute times (the lifted
    /// coefficient is `u/y` on exactly these windows).
    pub fn stage2_windows_absolute(&self) -> Vec<SourceWindow> {
        self.stage2
            .source_windows()
            .into_iter()
            .map(|mut w| {
                w.t_start += self.damping.t_m;
                w.t_end += self.damping.t_m;
                w
            })
            .collect()
    }

    /// Triangle inequality of the error decomposition, as measured.
    pub fn triangle_ok(&self, tol: f64) -> bool {
        self.total_error <= self.stage2_error + self.residue_norm + tol
    }

    /// The headline claim.
    pub fn within_epsilon(&self) -> bool {
        self.total_error <= self.epsilon
    }
}

fn assemble_schedule(
    sweep: &DampingSweep,
    stage2: &MobilePlan,
    length_l: f64,
    t_m: f64,
) -> CoreResult<SupportSchedule> {
    let mut breakpoints: Vec<f64> = Vec::new();
    let mut positions: Vec<f64> = Vec::new();
    if t_m > 0.0 {
        let s1 = sweep.schedule(length_l)?;
        breakpoints.extend_from_slice(s1.breakpoints());
        positions.extend_from_slice(s1.positions());
    }
    for (b, p) in stage2.schedule.breakpoints().iter().zip(stage2.schedule.positions()) {
        let b_abs = b + t_m;
        if let Some(&last) = breakpoints.last() {
            if b_abs <= last + 1e-15 {
                // stage-2 takes over exactly where stage 1 stops
                *positions.last_mut().unwrap() = *p;
                continue;
            }
        }
        breakpoints.push(b_abs);
        positions.push(*p);
    }
    SupportSchedule::new(length_l, breakpoints, positions)
}

/// Runs both stages and assembles the plan.
pub fn synthesize_multiplicative_mobile(
    y0: &GridFunction,
    y_d: &GridFunction,
    length_l: f64,
    t_final: f64,
    epsilon: f64,
    opts: &PipelineOptions,
) -> CoreResult<MultiplicativePlan> {
    if !(epsilon > 0.0) {
        return Err(CoreError::invalid("epsilon", "need epsilon > 0"));
    }
    if !y0.is_nonnegative(1e-12) || y0.norm_l2() == 0.0 {
        return Err(CoreError::invalid("y0", "need y0 >= 0 and not identically zero"));
    }
    if !y_d.is_nonnegative(1e-12) {
        return Err(CoreError::invalid("y_d", "target must be nonnegative"));
    }

    // stage 1: sweep within at most half the horizon
    let mut damping_opts = opts.damping.clone();
    damping_opts.t_budget = damping_opts.t_budget.min(0.5 * t_final);
    let sweep = damping_sweep(y0, length_l, epsilon, &damping_opts)
        .map_err(|e| CoreError::in_stage("damping_sweep", e))?;
    let t_m = sweep.t_m;
    let horizon2 = t_final - t_m;

    // stage 2 on the shifted clock, budget ε/2
    let stage2 =
        synthesize_mobile_additive(y_d, length_l, horizon2, epsilon / 2.0, &opts.synthesis)
            .map_err(|e| CoreError::in_stage("mobile_additive", e))?;

    // lift stage 2 over the damped residue
    let residue = sweep.final_state.resample(opts.synthesis.n_points);
    let lift = lift_to_multiplicative(&residue, &stage2.source_windows(), horizon2, &opts.lift)
        .map_err(|e| CoreError::in_stage("lift", e))?;

    // measured error decomposition
    let n = opts.synthesis.n_points;
    let k_max = opts.synthesis.k_max.min(n - 2);
    let residue_series = project_to_sine(&residue, k_max)?;
    let residue_free_final = evolve_free(&residue_series, horizon2)?;
    let residue_norm_grid = residue_free_final.evaluate(n);
    let residue_norm = residue_norm_grid.norm_l2();

    let final_series = lift.additive_final();
    let final_state = final_series.evaluate(n);
    let y_d_grid = if y_d.n_points() == n { y_d.clone() } else { y_d.resample(n) };
    let total_error = final_state.l2_distance(&y_d_grid);
    let stage2_error = final_state.sub(&residue_norm_grid).l2_distance(&y_d_grid);

    let schedule = assemble_schedule(&sweep, &stage2, length_l, t_m)?;

    Ok(MultiplicativePlan {
        epsilon,
        t_final,
        length_l,
        damping: sweep,
        stage2,
        lift,
        schedule,
        residue_free_final,
        residue_norm,
        stage2_error,
        total_error,
        final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SpectralOptions;
    use std::f64::consts::PI;

    fn pipeline_opts() -> PipelineOptions {
        PipelineOptions {
            damping: DampingOptions { t_budget: 0.3, ..DampingOptions::default() },
            synthesis: SynthesisOptions {
                k_max: 512,
                n_points: 8193,
                eval: SpectralOptions { k_max: 512, n_eval: 1025, max_snapshots: 96 },
                ..SynthesisOptions::default()
            },
            lift: LiftOptions { k_max: 512, ..PipelineOptions::default().lift },
        }
    }

    #[test]
    fn parabola_target_end_to_end() {
        let y0 = GridFunction::from_fn(1025, |x| (PI * x).sin());
        let y_d = GridFunction::from_fn(8193, |x| x * (1.0 - x));
        let plan =
            synthesize_multiplicative_mobile(&y0, &y_d, 0.4, 1.0, 0.1, &pipeline_opts()).unwrap();
        assert!(plan.within_epsilon(), "total error {}", plan.total_error);
        assert!(plan.triangle_ok(1e-9));
        assert!(plan.residue_norm <= 0.05 + 1e-9, "residue {}", plan.residue_norm);
        assert!(plan.stage2_error <= 0.05 + 1e-6, "stage2 {}", plan.stage2_error);
        assert!(plan.lift.v_sup.is_finite());
        // the schedule spans the whole horizon and starts at the origin
        assert_eq!(plan.schedule.breakpoints()[0], 0.0);
    }

    #[test]
    fn target_equal_to_residue_projection_is_cheap() {
        // steering towards the residue's own free evolution: total error
        // collapses to the stage-2 steering error for that tiny target
        let y0 = GridFunction::from_fn(1025, |x| 0.2 * (PI * x).sin());
        let opts = pipeline_opts();
        // run once to learn the residue
        let warm = synthesize_multiplicative_mobile(
            &y0,
            &GridFunction::zeros(8193),
            0.4,
            1.0,
            0.1,
            &opts,
        )
        .unwrap();
        let y_d = warm.residue_free_final.evaluate(8193);
        let y_d = GridFunction::new(
            y_d.values().iter().map(|v| v.max(0.0)).collect::<Vec<_>>(),
        )
        .unwrap();
        let plan = synthesize_multiplicative_mobile(&y0, &y_d, 0.4, 1.0, 0.1, &opts).unwrap();
        assert!(plan.within_epsilon(), "total {}", plan.total_error);
    }

    #[test]
    fn zero_initial_state_is_rejected() {
        let y0 = GridFunction::zeros(257);
        let y_d = GridFunction::from_fn(257, |x| x * (1.0 - x));
        assert!(synthesize_multiplicative_mobile(&y0, &y_d, 0.4, 1.0, 0.1, &pipeline_opts())
            .is_err());
    }
}
