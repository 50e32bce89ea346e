//! Terminal pulse controls and their exact error formulas.
//!
//! A plain pulse injects `(1/δ) ŷ_d(x)` on `[T-δ, T]`; the zero-tail
//! variant injects on `[T-2δ, T-δ]` and lets the state decay on the final
//! `[T-δ, T]`, so the control is off when the clock stops. Under the exact
//! spectral stepper the terminal `H¹₀` steering errors are
//!
//! `‖y(T) - ŷ_d‖²_{H¹₀} = 2π² Σ a_k² k² ψ(π²k²δ)`   (plain),
//!
//! with `ψ(r) = ((1-e^{-r})/r - 1)²`, and the same expression with
//! `ψ̂(r) = ((e^{-r}-e^{-2r})/r - 1)²` for the zero-tail variant. Both
//! auxiliary functions vanish at zero, increase, and stay below one, which
//! is all the width search needs.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::{project_to_sine, GridFunction, Interval, SineSeries};
use crate::solver::spectral::lambda;
use crate::solver::SourceWindow;

/// `ψ(r) = ((1 - e^{-r})/r - 1)²` with the removable singularity at zero
/// evaluated by series.
pub fn psi(r: f64) -> CoreResult<f64> {
    if !(r >= 0.0) {
        return Err(CoreError::invalid("r", format!("need r >= 0, got {r}")));
    }
    // (1-e^{-r})/r - 1 = -r/2 + r²/6 - r³/24 + ...
    let g = if r < 1e-6 {
        -r / 2.0 + r * r / 6.0 - r * r * r / 24.0
    } else {
        (-(-r).exp_m1()) / r - 1.0
    };
    Ok(g * g)
}

/// `ψ̂(r) = ((e^{-r} - e^{-2r})/r - 1)²`, the zero-tail analogue.
pub fn psi_hat(r: f64) -> CoreResult<f64> {
    if !(r >= 0.0) {
        return Err(CoreError::invalid("r", format!("need r >= 0, got {r}")));
    }
    // (e^{-r}-e^{-2r})/r - 1 = -3r/2 + 7r²/6 - 5r³/8 + ...
    let g = if r < 1e-6 {
        -1.5 * r + 7.0 * r * r / 6.0 - 0.625 * r * r * r
    } else {
        ((-r).exp() - (-2.0 * r).exp()) / r - 1.0
    };
    Ok(g * g)
}

/// Which pulse layout to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseVariant {
    /// Active on `[T-δ, T]`.
    Plain,
    /// Active on `[T-2δ, T-δ]`, zero on `[T-δ, T]`.
    ZeroTail,
}

fn aux(variant: PulseVariant, r: f64) -> f64 {
    match variant {
        PulseVariant::Plain => psi(r).expect("r >= 0"),
        PulseVariant::ZeroTail => psi_hat(r).expect("r >= 0"),
    }
}

/// Exact terminal `H¹₀` steering error of a pulse of width `delta`.
pub fn predict_pulse_error(target: &SineSeries, delta: f64, variant: PulseVariant) -> f64 {
    assert!(delta > 0.0, "need delta > 0");
    let mut acc = 0.0;
    for (i, a) in target.coeffs().iter().enumerate() {
        let k = i + 1;
        let kf = k as f64;
        acc += a * a * kf * kf * aux(variant, lambda(k) * delta);
    }
    (2.0 * std::f64::consts::PI.powi(2) * acc).sqrt()
}

/// Exact terminal `L²` steering error of the same pulse (the Parseval
/// companion of [`predict_pulse_error`], without the `k²` weight).
pub fn predict_pulse_error_l2(target: &SineSeries, delta: f64, variant: PulseVariant) -> f64 {
    assert!(delta > 0.0, "need delta > 0");
    let mut acc = 0.0;
    for (i, a) in target.coeffs().iter().enumerate() {
        acc += a * a * aux(variant, lambda(i + 1) * delta);
    }
    (2.0 * acc).sqrt()
}

/// First `δ` in the halving sequence `delta_init, delta_init/2, …` whose
/// predicted `H¹₀` error is at most `epsilon`.
///
/// Termination is guaranteed by continuity of the auxiliary functions at
/// zero unless `epsilon` sits below the mode-truncation floor, in which
/// case the search gives up after 60 halvings.
pub fn choose_delta(
    target: &SineSeries,
    epsilon: f64,
    variant: PulseVariant,
    delta_init: f64,
) -> CoreResult<f64> {
    if !(epsilon > 0.0) {
        return Err(CoreError::invalid("epsilon", "need epsilon > 0"));
    }
    if !(delta_init > 0.0) {
        return Err(CoreError::invalid("delta_init", "need delta_init > 0"));
    }
    let mut delta = delta_init;
    let mut best = f64::INFINITY;
    for _ in 0..=60 {
        let err = predict_pulse_error(target, delta, variant);
        if err <= epsilon {
            return Ok(delta);
        }
        best = best.min(err);
        delta /= 2.0;
    }
    Err(CoreError::DeltaSearchFailure { halvings: 60, achieved: best, epsilon })
}

/// L² twin of [`choose_delta`]; used where the steering budget is an `L²`
/// bound and the target carries significant high-mode content.
pub fn choose_delta_l2(
    target: &SineSeries,
    epsilon: f64,
    variant: PulseVariant,
    delta_init: f64,
) -> CoreResult<f64> {
    if !(epsilon > 0.0) {
        return Err(CoreError::invalid("epsilon", "need epsilon > 0"));
    }
    if !(delta_init > 0.0) {
        return Err(CoreError::invalid("delta_init", "need delta_init > 0"));
    }
    let mut delta = delta_init;
    let mut best = f64::INFINITY;
    for _ in 0..=60 {
        let err = predict_pulse_error_l2(target, delta, variant);
        if err <= epsilon {
            return Ok(delta);
        }
        best = best.min(err);
        delta /= 2.0;
    }
    Err(CoreError::DeltaSearchFailure { halvings: 60, achieved: best, epsilon })
}

/// A fully specified pulse: spatial profile, width, layout, horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PulseControl {
    pub variant: PulseVariant,
    pub delta: f64,
    pub t_final: f64,
    /// Grid profile `ŷ_d`; vanishes outside `support` exactly.
    pub profile: GridFunction,
    /// Mode coefficients of the profile at the build-time cutoff.
    pub target: SineSeries,
    pub support: Interval,
}

impl PulseControl {
    /// Active time span of the control.
    pub fn active_window(&self) -> (f64, f64) {
        match self.variant {
            PulseVariant::Plain => (self.t_final - self.delta, self.t_final),
            PulseVariant::ZeroTail => (self.t_final - 2.0 * self.delta, self.t_final - self.delta),
        }
    }

    /// Solver windows realizing the pulse (one active window; the zero
    /// tail needs no window of its own).
    pub fn source_windows(&self) -> Vec<SourceWindow> {
        let (t0, t1) = self.active_window();
        vec![SourceWindow::new(t0, t1, 1.0 / self.delta, self.profile.clone(), self.support)
            .expect("validated at build time")]
    }

    pub fn amplitude(&self) -> f64 {
        1.0 / self.delta
    }
}

/// Builds the pulse for a grid target that vanishes outside `support`.
///
/// The stored mode coefficients are the projection of exactly the profile
/// the solver will see, so the simulated error reproduces the closed forms
/// to rounding.
pub fn build_pulse_control(
    target: &GridFunction,
    support: &Interval,
    t_final: f64,
    delta: f64,
    variant: PulseVariant,
    k_max: usize,
) -> CoreResult<PulseControl> {
    let max_delta = match variant {
        PulseVariant::Plain => t_final,
        PulseVariant::ZeroTail => t_final / 2.0,
    };
    if !(delta > 0.0 && delta < max_delta) {
        return Err(CoreError::invalid(
            "delta",
            format!("need 0 < delta < {max_delta} for this variant, got {delta}"),
        ));
    }
    let outside = target.sup_outside(support);
    if outside > 1e-12 {
        return Err(CoreError::SupportViolation {
            mass: outside,
            lo: support.lo(),
            hi: support.hi(),
        });
    }
    let series = project_to_sine(target, k_max)?;
    Ok(PulseControl {
        variant,
        delta,
        t_final,
        profile: target.clone(),
        target: series,
        support: *support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{evolve_additive, SpectralOptions};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.0).unwrap(), 0.0);
        assert_eq!(psi_hat(0.0).unwrap(), 0.0);
        // ψ(1) = ((1 - e^{-1}) - 1)² = e^{-2}
        assert_relative_eq!(psi(1.0).unwrap(), (-2.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(psi(1.0).unwrap(), 0.135335, epsilon = 1e-6);
        // ψ̂(1) = (e^{-1} - e^{-2} - 1)²
        let g: f64 = (-1.0f64).exp() - (-2.0f64).exp() - 1.0;
        assert_relative_eq!(psi_hat(1.0).unwrap(), g * g, epsilon = 1e-15);
        assert_relative_eq!(psi_hat(1.0).unwrap(), 0.588989, epsilon = 1e-6);
        assert!(psi(-0.1).is_err());
        assert!(psi_hat(-1.0).is_err());
    }

    #[test]
    fn psi_series_branch_is_continuous() {
        for &r in &[1e-8, 1e-7, 9.9e-7, 1.1e-6, 1e-5] {
            let exact = ((1.0 - (-r as f64).exp()) / r - 1.0).powi(2);
            assert_relative_eq!(psi(r).unwrap(), exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn psi_monotone_and_below_one() {
        // sampled monotone increase on a dyadic grid; both functions stay
        // in [0, 1), saturating to 1.0 only at double-precision rounding
        // (1 - ψ̂(r) underflows below machine epsilon near r ≈ 40)
        for f in [psi, psi_hat] {
            let mut prev = -1.0;
            for i in -20..=10 {
                let r = 2.0f64.powi(i);
                let v = f(r).unwrap();
                assert!(v >= prev, "not monotone at r = {r}");
                if v < 1.0 {
                    assert!(v > prev, "not strictly increasing at r = {r}");
                }
                assert!((0.0..=1.0).contains(&v), "out of range at r = {r}");
                if r <= 32.0 {
                    assert!(v < 1.0, "saturated too early at r = {r}");
                }
                prev = v;
            }
        }
    }

    #[test]
    fn predicted_error_single_mode() {
        // a_1 = 0.5, δ = 0.01, plain: √(2π² · 0.25 · ψ(π²/100))
        let target = SineSeries::mode(1, 0.5, 8);
        let err = predict_pulse_error(&target, 0.01, PulseVariant::Plain);
        let expect = (2.0 * PI * PI * 0.25 * psi(PI * PI * 0.01).unwrap()).sqrt();
        assert_relative_eq!(err, expect, epsilon = 1e-15);
        assert_relative_eq!(err, 0.1061045241, epsilon = 1e-9);
        // error below the target's H¹₀ norm, and shrinking with δ
        assert!(err < target.norm_h01());
        assert!(predict_pulse_error(&target, 1e-9, PulseVariant::Plain) < 1e-6);
    }

    #[test]
    fn predicted_error_always_below_target_norm() {
        let target = SineSeries::new(vec![0.4, -0.2, 0.1, 0.3, -0.05]).unwrap();
        for &d in &[10.0, 1.0, 0.1, 0.01] {
            for v in [PulseVariant::Plain, PulseVariant::ZeroTail] {
                // "<" analytically; "≤" once ψ̂ saturates at rounding
                assert!(predict_pulse_error(&target, d, v) <= target.norm_h01());
                assert!(predict_pulse_error_l2(&target, d, v) <= target.norm_l2());
                if d <= 0.1 {
                    assert!(predict_pulse_error(&target, d, v) < target.norm_h01());
                }
            }
        }
    }

    #[test]
    fn choose_delta_halves_to_the_crossover() {
        // a_1 = 0.5, ε = 0.2: the (3.6) values along 0.1, 0.05, 0.025, 0.0125
        // are 0.8095, 0.4681, 0.2529, 0.1316 — the search stops at 0.0125
        let target = SineSeries::mode(1, 0.5, 8);
        let d = choose_delta(&target, 0.2, PulseVariant::Plain, 0.1).unwrap();
        assert_relative_eq!(d, 0.0125, epsilon = 1e-15);
        assert!(predict_pulse_error(&target, d, PulseVariant::Plain) <= 0.2);
        assert!(predict_pulse_error(&target, 2.0 * d, PulseVariant::Plain) > 0.2);

        // ε at (or above) the H¹₀ norm: any δ works, the initial one returns
        let d0 = choose_delta(&target, target.norm_h01(), PulseVariant::Plain, 0.1).unwrap();
        assert_eq!(d0, 0.1);
        // zero target: error identically zero
        let z = choose_delta(&SineSeries::zeros(4), 1e-12, PulseVariant::Plain, 0.3).unwrap();
        assert_eq!(z, 0.3);
    }

    #[test]
    fn choose_delta_fails_below_truncation_floor() {
        let target = SineSeries::mode(1, 0.5, 4);
        // εs this small are unreachable in 60 halvings from 1e3
        let r = choose_delta(&target, 1e-300, PulseVariant::Plain, 1e3);
        assert!(matches!(r, Err(CoreError::DeltaSearchFailure { .. })));
    }

    #[test]
    fn built_pulse_layout() {
        let profile = GridFunction::from_fn(513, |x| (PI * x).sin());
        let support = Interval::new(0.0, 1.0).unwrap();
        let p =
            build_pulse_control(&profile, &support, 1.0, 0.01, PulseVariant::Plain, 32).unwrap();
        assert_eq!(p.active_window(), (0.99, 1.0));
        assert_relative_eq!(p.amplitude(), 100.0);
        let z =
            build_pulse_control(&profile, &support, 1.0, 0.01, PulseVariant::ZeroTail, 32).unwrap();
        assert_eq!(z.active_window(), (0.98, 0.99));
        // zero-tail needs δ < T/2
        assert!(
            build_pulse_control(&profile, &support, 1.0, 0.6, PulseVariant::ZeroTail, 32).is_err()
        );
        // profile mass outside the support is rejected
        let narrow = Interval::new(0.6, 0.9).unwrap();
        assert!(build_pulse_control(&profile, &narrow, 1.0, 0.01, PulseVariant::Plain, 32).is_err());
    }

    #[test]
    fn simulated_error_matches_closed_form_exactly() {
        // the two sides come from the same mode formulas; agreement is
        // rounding-level, asserted at 1e-9
        let profile = GridFunction::from_fn(1025, |x| {
            (PI * x).sin() + 0.3 * (3.0 * PI * x).sin() - 0.1 * (7.0 * PI * x).sin()
        });
        let support = Interval::new(0.0, 1.0).unwrap();
        let opts = SpectralOptions { k_max: 32, n_eval: 513, max_snapshots: 64 };
        for variant in [PulseVariant::Plain, PulseVariant::ZeroTail] {
            for &delta in &[0.05, 0.01] {
                let p = build_pulse_control(&profile, &support, 0.5, delta, variant, opts.k_max)
                    .unwrap();
                let traj =
                    evolve_additive(&SineSeries::zeros(opts.k_max), &p.source_windows(), 0.5, &opts)
                        .unwrap();
                let simulated = traj.final_series.unwrap().h01_distance(&p.target);
                let predicted = predict_pulse_error(&p.target, delta, variant);
                assert!(
                    (simulated - predicted).abs() <= 1e-9,
                    "variant {variant:?} δ={delta}: |{simulated} - {predicted}|"
                );
            }
        }
    }
}
