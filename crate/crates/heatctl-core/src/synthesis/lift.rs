//! Bilinear lift of an additive control: `v = u/y` on the set where the
//! control is on.
//!
//! Over a strictly positive state the additive system with source `u` and
//! the multiplicative system with coefficient `v = u/y` share the same
//! solution, because `u χ_ω = v y χ_ω` identically. The lift therefore
//! simulates the additive run exactly (mode space), divides by it where
//! `u > 0`, and certifies the two quantities the construction needs:
//! the measured floor `ρ = min y` over the active set (the state must stay
//! away from zero to divide) and the resulting `‖v‖_∞ ≤ ‖u‖_∞/ρ`.
//!
//! `resimulate` cross-checks the identity numerically: it evolves the
//! multiplicative system by Crank-Nicolson with `v(·,t)` refreshed from
//! the additive solution at every step midpoint and must reproduce the
//! additive final state.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::{project_to_sine, GridFunction, SineSeries};
use crate::solver::cn::CnStepper;
use crate::solver::spectral::{additive_segments, state_on_segments, ModeSegment};
use crate::solver::trajectory::{snapshot_times, Diagnostics, Trajectory};
use crate::solver::SourceWindow;

/// Lift parameters.
#[derive(Debug, Clone, Copy)]
pub struct LiftOptions {
    pub k_max: usize,
    /// Smallest admissible state value on the active set.
    pub floor_rho: f64,
    /// Controls must switch on at least this long after the run starts,
    /// giving the strong maximum principle time to push the state positive.
    pub t_min_active: f64,
    /// Anchor times per window at which `v` is sampled and recorded.
    pub anchors_per_window: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { k_max: 256, floor_rho: 1e-8, t_min_active: 1e-3, anchors_per_window: 17 }
    }
}

/// A sampled `v(·,t)` field at one anchor time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftAnchor {
    pub t: f64,
    pub v: GridFunction,
    /// `max |u - v·y| / max(u)` over active points at this anchor.
    pub identity_residual: f64,
}

/// The lifted control: the additive windows it came from, the measured
/// certificates, and enough state to evaluate `v(·,t)` anywhere.
///
/// The division uses `max(y, ỹ_{y0})` pointwise: the controlled state is
/// at least the free part by comparison (the source is nonnegative), so
/// flooring by the free part only removes mode-truncation undershoot and
/// never raises the denominator above the true state.
#[derive(Debug, Clone)]
pub struct LiftedControl {
    pub t_final: f64,
    pub windows: Vec<SourceWindow>,
    /// Measured `min y` over the active space-time set (free-part floored).
    pub rho_measured: f64,
    /// Measured `sup v` over the active set (nonnegative since `u ≥ 0`).
    pub v_sup: f64,
    pub anchors: Vec<LiftAnchor>,
    pub n_grid: usize,
    segments: Vec<ModeSegment>,
    free_coeffs: SineSeries,
}

impl LiftedControl {
    fn effective_state(&self, t: f64, n: usize) -> GridFunction {
        let y = state_on_segments(&self.segments, t).evaluate(n);
        let free = crate::solver::evolve_free(&self.free_coeffs, t.max(0.0))
            .expect("t >= 0")
            .evaluate(n);
        let values = y
            .values()
            .iter()
            .zip(free.values())
            .map(|(a, b)| a.max(*b))
            .collect::<Vec<_>>();
        GridFunction::new(values).expect("finite by construction")
    }

    /// `v(·,t)` on an `n`-point grid: `u(x,t)/y(x,t)` where the control is
    /// on and the profile positive, zero elsewhere.
    pub fn v_at(&self, t: f64, n: usize) -> GridFunction {
        let mut out = vec![0.0; n];
        if let Some(w) = self.windows.iter().find(|w| w.t_start <= t && t <= w.t_end) {
            let y = self.effective_state(t, n);
            let profile = if w.profile.n_points() == n { w.profile.clone() } else { w.profile.resample(n) };
            let cut = 1e-12 * profile.sup_norm().max(1e-300);
            for i in 0..n {
                let u = w.amplitude * profile.values()[i];
                if u > cut && y.values()[i] > 0.0 {
                    out[i] = u / y.values()[i];
                }
            }
        }
        GridFunction::new(out).expect("finite by construction")
    }

    /// Final state of the (exact) additive run the lift was built on.
    pub fn additive_final(&self) -> SineSeries {
        state_on_segments(&self.segments, self.t_final)
    }

    /// Re-simulates the multiplicative system with the lifted coefficient
    /// by Crank-Nicolson, refreshing `v` at each step midpoint.
    pub fn resimulate(&self, y0: &GridFunction, dt: f64, max_snapshots: usize) -> CoreResult<Trajectory> {
        if !(dt > 0.0) {
            return Err(CoreError::invalid("dt", "need dt > 0"));
        }
        let n = y0.n_points();
        let mut edges = vec![0.0];
        for w in &self.windows {
            edges.push(w.t_start);
            edges.push(w.t_end);
        }
        edges.push(self.t_final);
        edges.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);

        let plan = snapshot_times(self.t_final, &edges, max_snapshots);
        let mut next_snap = 1usize;
        let mut stepper = CnStepper::new(y0, 0.0);
        let mut diagnostics = Diagnostics::empty();
        diagnostics.absorb(y0.values());
        diagnostics.snapshot_l2.push(y0.norm_l2());
        let mut times = vec![0.0];
        let mut snapshots = vec![y0.clone()];

        for span in edges.windows(2) {
            let (t0, t1) = (span[0], span[1]);
            if t1 - t0 <= 1e-15 {
                continue;
            }
            let active = self.windows.iter().any(|w| w.t_start <= t0 + 1e-15 && t1 <= w.t_end + 1e-15);
            let steps = (((t1 - t0) / dt).ceil() as usize).max(1);
            let dt_eff = (t1 - t0) / steps as f64;
            stepper.set_time(t0);
            for s in 0..steps {
                let v = if active {
                    Some(self.v_at(stepper.time() + 0.5 * dt_eff, n))
                } else {
                    None
                };
                stepper.step(dt_eff, v.as_ref().map(|g| g.values()));
                if s + 1 == steps {
                    stepper.set_time(t1);
                }
                diagnostics.absorb(stepper.values());
                if next_snap < plan.len() && stepper.time() >= plan[next_snap] - 1e-15 {
                    let g = stepper.state();
                    diagnostics.snapshot_l2.push(g.norm_l2());
                    times.push(stepper.time());
                    snapshots.push(g);
                    while next_snap < plan.len() && plan[next_snap] <= stepper.time() + 1e-15 {
                        next_snap += 1;
                    }
                }
            }
        }
        if (times.last().copied().unwrap_or(0.0) - self.t_final).abs() > 1e-15 {
            let g = stepper.state();
            diagnostics.snapshot_l2.push(g.norm_l2());
            times.push(self.t_final);
            snapshots.push(g);
        }
        let final_grid = stepper.state();
        Ok(Trajectory { times, snapshots, final_grid, final_series: None, diagnostics })
    }
}

/// Builds the lift over initial state `y0` for the given additive windows.
///
/// Fails with [`CoreError::DegenerateState`] when the measured minimum of
/// the additive state over the active set falls under `floor_rho` (in
/// particular for `y0 ≡ 0`, where the bilinear system cannot move at all).
pub fn lift_to_multiplicative(
    y0: &GridFunction,
    windows: &[SourceWindow],
    t_final: f64,
    opts: &LiftOptions,
) -> CoreResult<LiftedControl> {
    if !y0.is_nonnegative(1e-12) {
        return Err(CoreError::invalid("y0", "initial state must be nonnegative"));
    }
    if y0.norm_l2() == 0.0 {
        return Err(CoreError::DegenerateState { rho: 0.0, floor: opts.floor_rho });
    }
    for w in windows {
        if w.t_start < opts.t_min_active {
            return Err(CoreError::invalid(
                "windows",
                format!(
                    "lift window starts at t = {} < t_min_active = {}",
                    w.t_start, opts.t_min_active
                ),
            ));
        }
        if w.amplitude < 0.0 || w.profile.min_value() < -1e-12 {
            return Err(CoreError::invalid("windows", "lift requires nonnegative controls"));
        }
    }
    let n = y0.n_points();
    let k_max = opts.k_max.min(n.saturating_sub(2));
    let y0_series = project_to_sine(y0, k_max)?;
    let segments = additive_segments(&y0_series, windows, t_final, k_max)?;

    let mut rho = f64::INFINITY;
    let mut v_sup: f64 = 0.0;
    let mut anchors = Vec::new();
    for w in windows {
        let profile = if w.profile.n_points() == n { w.profile.clone() } else { w.profile.resample(n) };
        let cut = 1e-12 * profile.sup_norm().max(1e-300);
        let a = opts.anchors_per_window.max(2);
        for i in 0..a {
            let t = w.t_start + (w.t_end - w.t_start) * i as f64 / (a - 1) as f64;
            let y = state_on_segments(&segments, t).evaluate(n);
            let free = crate::solver::evolve_free(&y0_series, t)?.evaluate(n);
            let mut v = vec![0.0; n];
            let mut resid: f64 = 0.0;
            let mut u_max: f64 = 0.0;
            for j in 0..n {
                let u = w.amplitude * profile.values()[j];
                if u > cut {
                    let yj = y.values()[j].max(free.values()[j]);
                    rho = rho.min(yj);
                    if yj > 0.0 {
                        v[j] = u / yj;
                        v_sup = v_sup.max(v[j]);
                        resid = resid.max((u - v[j] * yj).abs());
                        u_max = u_max.max(u);
                    }
                }
            }
            anchors.push(LiftAnchor {
                t,
                v: GridFunction::new(v)?,
                identity_residual: if u_max > 0.0 { resid / u_max } else { 0.0 },
            });
        }
    }
    if windows.is_empty() {
        rho = f64::INFINITY;
    }
    if !windows.is_empty() && rho < opts.floor_rho {
        return Err(CoreError::DegenerateState { rho, floor: opts.floor_rho });
    }
    Ok(LiftedControl {
        t_final,
        windows: windows.to_vec(),
        rho_measured: if rho.is_finite() { rho } else { 0.0 },
        v_sup,
        anchors,
        n_grid: n,
        segments,
        free_coeffs: y0_series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Interval;
    use std::f64::consts::PI;

    fn late_pulse(n: usize) -> SourceWindow {
        let profile = GridFunction::from_fn(n, |x| {
            let s: f64 = (x - 0.5) / 0.2;
            if s.abs() < 1.0 {
                0.4 * (1.0 - s * s).powi(2)
            } else {
                0.0
            }
        });
        SourceWindow::new(0.12, 0.16, 25.0, profile, Interval::new(0.25, 0.75).unwrap()).unwrap()
    }

    #[test]
    fn lift_is_bounded_and_resimulates() {
        let n = 257;
        let y0 = GridFunction::from_fn(n, |x| (PI * x).sin());
        let w = late_pulse(n);
        let opts = LiftOptions { k_max: 128, ..LiftOptions::default() };
        let lift = lift_to_multiplicative(&y0, &[w], 0.2, &opts).unwrap();
        assert!(lift.rho_measured > 0.0);
        assert!(lift.v_sup.is_finite());
        // the defining identity holds at every anchor
        for a in &lift.anchors {
            assert!(a.identity_residual <= 1e-10, "residual {}", a.identity_residual);
        }
        // CN with the lifted v reproduces the additive final state
        let traj = lift.resimulate(&y0, 2e-5, 64).unwrap();
        let additive = lift.additive_final().evaluate(n);
        let err = traj.final_grid.l2_distance(&additive);
        assert!(err <= 1e-3, "cross-solver disagreement {err}");
    }

    #[test]
    fn no_windows_means_zero_v() {
        let y0 = GridFunction::from_fn(129, |x| (PI * x).sin());
        let lift = lift_to_multiplicative(&y0, &[], 0.1, &LiftOptions::default()).unwrap();
        assert_eq!(lift.v_sup, 0.0);
        assert_eq!(lift.v_at(0.05, 129).sup_norm(), 0.0);
    }

    #[test]
    fn zero_initial_state_is_degenerate() {
        let y0 = GridFunction::zeros(129);
        let w = late_pulse(129);
        let err = lift_to_multiplicative(&y0, &[w], 0.2, &LiftOptions::default()).unwrap_err();
        assert!(matches!(err, CoreError::DegenerateState { .. }));
    }

    #[test]
    fn early_windows_are_rejected() {
        let n = 129;
        let y0 = GridFunction::from_fn(n, |x| (PI * x).sin());
        let profile = GridFunction::from_fn(n, |x| if x > 0.4 && x < 0.6 { 1.0 } else { 0.0 });
        let w = SourceWindow::new(1e-5, 0.05, 1.0, profile, Interval::new(0.3, 0.7).unwrap()).unwrap();
        assert!(lift_to_multiplicative(&y0, &[w], 0.1, &LiftOptions::default()).is_err());
    }
}
