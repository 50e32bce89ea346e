//! Mobile-support additive synthesis: steer each piece of the target with
//! its own terminal pulse while the support slides across the domain.
//!
//! The target is decomposed into `M = ⌈1/l⌉` pieces, each mollified to sit
//! strictly inside its support. Piece `j < M` gets a zero-tail pulse of
//! width `δ_j`, the last piece a plain pulse; widths nest, `δ_j ≤ δ_{j-1}/2`,
//! so the active windows `(T-2δ_j, T-δ_j)` are pairwise disjoint and the
//! support schedule can hold position `(j-1)l` exactly while piece `j` is
//! being injected. Budgets follow the decomposition: half of `ε` for the
//! mollification total, `ε/(2M)` of steering per piece.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::{
    decompose_target, mollify_piece, GridFunction, SineSeries, SupportSchedule,
    TargetDecomposition,
};
use crate::solver::{evolve_additive, SourceWindow, SpectralOptions, Trajectory};
use crate::synthesis::pulse::{
    build_pulse_control, choose_delta_l2, predict_pulse_error, predict_pulse_error_l2,
    PulseControl, PulseVariant,
};

/// Knobs for the synthesis grid and pulse placement.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    /// Mode cutoff used for profiles, predictions and simulation.
    pub k_max: usize,
    /// Grid on which pieces are cut, mollified and measured.
    pub n_points: usize,
    /// Initial mollification margin as a fraction of the piece width.
    pub margin_frac: f64,
    /// `δ_1` starts at this fraction of the horizon (must stay < 1/2 for
    /// the zero-tail layout).
    pub delta_frac: f64,
    /// Evaluation options for simulation.
    pub eval: SpectralOptions,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            k_max: 256,
            n_points: 2049,
            margin_frac: 0.125,
            delta_frac: 0.24,
            eval: SpectralOptions::default(),
        }
    }
}

/// A complete mobile steering plan for one target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MobilePlan {
    pub t_final: f64,
    pub epsilon: f64,
    pub target: GridFunction,
    pub decomposition: TargetDecomposition,
    /// Nested pulse widths, `deltas[j] ≤ deltas[j-1]/2`.
    pub deltas: Vec<f64>,
    /// One pulse per piece (zero pieces carry zero-amplitude pulses).
    pub controls: Vec<PulseControl>,
    pub schedule: SupportSchedule,
    /// Per-piece predicted L² steering errors (exact under the spectral
    /// stepper).
    pub steering_predicted: Vec<f64>,
    /// Per-piece measured mollification distances.
    pub mollify_distance: Vec<f64>,
    /// Σ steering + Σ mollification: an a-priori bound on the final error.
    pub predicted_error: f64,
}

impl MobilePlan {
    /// Solver windows of all pulses, time-ordered.
    pub fn source_windows(&self) -> Vec<SourceWindow> {
        let mut ws: Vec<SourceWindow> =
            self.controls.iter().flat_map(|c| c.source_windows()).collect();
        ws.sort_by(|a, b| a.t_start.partial_cmp(&b.t_start).expect("finite times"));
        ws
    }

    /// Simulates the plan over `y0` with the plan's own mode cutoff.
    pub fn simulate(&self, y0: &SineSeries, opts: &SpectralOptions) -> CoreResult<Trajectory> {
        evolve_additive(y0, &self.source_windows(), self.t_final, opts)
    }

    /// `‖y(·,T) - y_d‖_{L²}` of a simulated trajectory against the stored
    /// target, measured on the synthesis grid.
    pub fn measured_error(&self, traj: &Trajectory) -> f64 {
        let fin = traj
            .final_series
            .as_ref()
            .map(|s| s.evaluate(self.target.n_points()))
            .unwrap_or_else(|| traj.final_grid.resample(self.target.n_points()));
        fin.l2_distance(&self.target)
    }

    /// Structural checks: window disjointness and pointwise confinement of
    /// every control inside the scheduled support while it is active.
    pub fn validate(&self) -> CoreResult<()> {
        let ws = self.source_windows();
        for pair in ws.windows(2) {
            if pair[1].t_start < pair[0].t_end - 1e-12 {
                return Err(CoreError::WindowOverlap { t: pair[1].t_start });
            }
        }
        for c in &self.controls {
            let (t0, t1) = c.active_window();
            for t in [t0 + 1e-12, 0.5 * (t0 + t1), t1 - 1e-12] {
                let omega = self.schedule.support_at(t);
                let outside = c.profile.sup_outside(&omega);
                if outside > 1e-12 {
                    return Err(CoreError::SupportViolation {
                        mass: outside,
                        lo: omega.lo(),
                        hi: omega.hi(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Builds the support schedule of the sliding construction: position
/// `(j-1)l` from `T - δ_{j-1}` to `T - δ_j`, last position clamped to
/// `1 - l`.
fn build_schedule(length_l: f64, t_final: f64, deltas: &[f64]) -> CoreResult<SupportSchedule> {
    let m = deltas.len();
    let mut breakpoints = vec![0.0];
    let mut positions = vec![0.0];
    for j in 1..m {
        let pos = (j as f64 * length_l).min(1.0 - length_l);
        breakpoints.push(t_final - deltas[j - 1]);
        positions.push(pos);
    }
    SupportSchedule::new(length_l, breakpoints, positions)
}

/// Constructs the mobile additive plan for a nonnegative target.
pub fn synthesize_mobile_additive(
    y_d: &GridFunction,
    length_l: f64,
    t_final: f64,
    epsilon: f64,
    opts: &SynthesisOptions,
) -> CoreResult<MobilePlan> {
    if !(epsilon > 0.0) {
        return Err(CoreError::invalid("epsilon", "need epsilon > 0"));
    }
    if !(t_final > 0.0) {
        return Err(CoreError::invalid("t_final", "need t_final > 0"));
    }
    if !(opts.delta_frac > 0.0 && opts.delta_frac < 0.5) {
        return Err(CoreError::invalid("delta_frac", "need 0 < delta_frac < 1/2"));
    }
    let y_d = if y_d.n_points() == opts.n_points { y_d.clone() } else { y_d.resample(opts.n_points) };
    let mut decomposition = decompose_target(&y_d, length_l)?;
    let m = decomposition.piece_count;
    let moll_tol = epsilon / (2.0 * m as f64);
    let steer_tol = epsilon / (2.0 * m as f64);

    let mut deltas = Vec::with_capacity(m);
    let mut controls = Vec::with_capacity(m);
    let mut steering_predicted = Vec::with_capacity(m);
    let mut mollify_distance = Vec::with_capacity(m);

    for j in 0..m {
        let piece = decomposition.pieces[j].clone();
        let margin = opts.margin_frac.min(0.2499) * piece.support.length();
        let hat = mollify_piece(&piece.data, &piece.support, margin, moll_tol)
            .map_err(|e| CoreError::in_stage("mollify", e))?;
        mollify_distance.push(hat.distance);

        let variant = if j + 1 == m { PulseVariant::Plain } else { PulseVariant::ZeroTail };
        let delta_init =
            if j == 0 { opts.delta_frac * t_final } else { deltas[j - 1] / 2.0 };
        let series = crate::field::project_to_sine(&hat.data, opts.k_max)?;
        let delta = choose_delta_l2(&series, steer_tol, variant, delta_init)
            .map_err(|e| CoreError::in_stage("choose_delta", e))?;
        deltas.push(delta);
        steering_predicted.push(predict_pulse_error_l2(&series, delta, variant));

        let control =
            build_pulse_control(&hat.data, &hat.omega, t_final, delta, variant, opts.k_max)
                .map_err(|e| CoreError::in_stage("build_pulse", e))?;
        controls.push(control);
        decomposition.mollified.push(hat);
    }

    let schedule = build_schedule(length_l, t_final, &deltas)?;
    let predicted_error =
        steering_predicted.iter().sum::<f64>() + mollify_distance.iter().sum::<f64>();
    let plan = MobilePlan {
        t_final,
        epsilon,
        target: y_d,
        decomposition,
        deltas,
        controls,
        schedule,
        steering_predicted,
        mollify_distance,
        predicted_error,
    };
    plan.validate()?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SpectralOptions;

    fn opts(k_max: usize, n: usize) -> SynthesisOptions {
        SynthesisOptions {
            k_max,
            n_points: n,
            eval: SpectralOptions { k_max, n_eval: 1025, max_snapshots: 128 },
            ..SynthesisOptions::default()
        }
    }

    #[test]
    fn parabola_three_piece_plan() {
        let y_d = GridFunction::from_fn(8193, |x| x * (1.0 - x));
        let o = opts(1024, 8193);
        let plan = synthesize_mobile_additive(&y_d, 0.4, 1.0, 0.05, &o).unwrap();
        assert_eq!(plan.decomposition.piece_count, 3);
        assert_eq!(plan.deltas.len(), 3);
        assert!(plan.deltas[0] < 0.5);
        for j in 1..3 {
            assert!(plan.deltas[j] <= plan.deltas[j - 1] / 2.0 + 1e-15);
        }
        plan.validate().unwrap();
        // simulate from zero and measure
        let traj = plan.simulate(&SineSeries::zeros(o.k_max), &o.eval).unwrap();
        let err = plan.measured_error(&traj);
        assert!(err <= 0.05, "measured error {err} > 0.05 (predicted {})", plan.predicted_error);
    }

    #[test]
    fn zero_target_is_a_zero_plan() {
        let y_d = GridFunction::zeros(1025);
        let o = opts(64, 1025);
        let plan = synthesize_mobile_additive(&y_d, 0.4, 1.0, 0.01, &o).unwrap();
        for c in &plan.controls {
            assert_eq!(c.profile.sup_norm(), 0.0);
        }
        let traj = plan.simulate(&SineSeries::zeros(64), &o.eval).unwrap();
        assert!(plan.measured_error(&traj) <= 1e-14);
    }

    #[test]
    fn full_width_support_degenerates_to_single_pulse() {
        // l = 1: one piece, one plain pulse (the static local result)
        let y_d = GridFunction::from_fn(2049, |x| x * (1.0 - x));
        let o = opts(256, 2049);
        let plan = synthesize_mobile_additive(&y_d, 1.0, 1.0, 0.05, &o).unwrap();
        assert_eq!(plan.decomposition.piece_count, 1);
        assert_eq!(plan.controls[0].variant, PulseVariant::Plain);
        let traj = plan.simulate(&SineSeries::zeros(o.k_max), &o.eval).unwrap();
        assert!(plan.measured_error(&traj) <= 0.05);
    }

    #[test]
    fn schedule_holds_piece_positions() {
        let y_d = GridFunction::from_fn(8193, |x| x * (1.0 - x));
        let o = opts(1024, 8193);
        let plan = synthesize_mobile_additive(&y_d, 0.4, 1.0, 0.05, &o).unwrap();
        // while piece j is active the schedule sits at (j-1)·l (clamped)
        for (j, c) in plan.controls.iter().enumerate() {
            let (t0, t1) = c.active_window();
            let r = plan.schedule.position_at(0.5 * (t0 + t1));
            let want = (j as f64 * 0.4).min(1.0 - 0.4);
            assert!((r - want).abs() < 1e-12, "piece {j}: r = {r}, want {want}");
        }
    }
}
