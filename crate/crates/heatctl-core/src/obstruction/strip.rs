//! Strip obstruction for the bilinear system with static support.
//!
//! On a strip `(α,β)` disjoint from the control support, the controlled
//! state solves the heat equation with nonnegative boundary traces, so by
//! comparison it dominates the solution of the homogeneous Dirichlet
//! problem on the strip with the same initial data. The final norm of the
//! latter is a floor no bilinear control can undercut; it is computed by
//! the strip's own eigen-expansion, `sin(kπ(x-α)/(β-α))` with rates
//! `(kπ/(β-α))²`.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::{GridFunction, Interval};
use crate::numerics::trapezoid;
use crate::obstruction::sampling::random_reaction_windows;
use crate::solver::{evolve_multiplicative, CnOptions, ReactionWindow};

/// `‖ŷ(·,T)‖_{L²(α,β)}` for the homogeneous Dirichlet problem on the
/// strip, from the eigen-expansion of `y0` restricted there.
pub fn strip_floor(y0: &GridFunction, strip: &Interval, t_final: f64, k_modes: usize) -> f64 {
    let len = strip.length();
    let n_sub = 2049;
    let h_sub = len / (n_sub - 1) as f64;
    // sample the restriction by linear interpolation on a strip-local grid
    let h = y0.h();
    let sample = |x: f64| -> f64 {
        let s = (x / h).clamp(0.0, (y0.n_points() - 1) as f64);
        let i = (s.floor() as usize).min(y0.n_points() - 2);
        let w = s - i as f64;
        y0.values()[i] * (1.0 - w) + y0.values()[i + 1] * w
    };
    let restricted: Vec<f64> = (0..n_sub).map(|i| sample(strip.lo() + i as f64 * h_sub)).collect();
    let mut sum_sq = 0.0;
    let mut integrand = vec![0.0; n_sub];
    for k in 1..=k_modes {
        let rate = (k as f64 * std::f64::consts::PI / len).powi(2);
        for (i, v) in restricted.iter().enumerate() {
            let s = i as f64 * h_sub / len;
            integrand[i] = v * (k as f64 * std::f64::consts::PI * s).sin();
        }
        let c_k = 2.0 / len * trapezoid(&integrand, h_sub);
        let decayed = c_k * (-rate * t_final).exp();
        sum_sq += decayed * decayed;
    }
    (len / 2.0 * sum_sq).sqrt()
}

/// One simulated bilinear control compared against the floor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripSample {
    pub sample_id: u64,
    /// `‖y(·,T)‖_{L²(α,β)}` of the controlled run.
    pub strip_norm: f64,
    pub pass: bool,
}

/// Outcome of the strip suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripReport {
    /// The eigen-expansion floor.
    pub floor: f64,
    pub comparison_tol: f64,
    pub samples: Vec<StripSample>,
}

impl StripReport {
    pub fn all_pass(&self) -> bool {
        self.samples.iter().all(|s| s.pass)
    }

    pub fn min_strip_norm(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, s| m.min(s.strip_norm))
    }
}

/// Simulates the supplied reaction controls and checks each strip norm
/// against the floor.
pub fn verify_strip_obstruction(
    y0: &GridFunction,
    omega: &Interval,
    strip: &Interval,
    t_final: f64,
    controls: &[Vec<ReactionWindow>],
    cn: &CnOptions,
    comparison_tol: f64,
) -> CoreResult<StripReport> {
    if omega.intersects(strip) {
        return Err(CoreError::invalid("strip", "strip must be disjoint from the control support"));
    }
    if !y0.is_nonnegative(1e-12) {
        return Err(CoreError::invalid("y0", "initial state must be nonnegative"));
    }
    let floor = strip_floor(y0, strip, t_final, 64);
    let mut samples = Vec::with_capacity(controls.len());
    for (id, windows) in controls.iter().enumerate() {
        for w in windows {
            if !omega.covers(&w.support) {
                return Err(CoreError::invalid("controls", "control leaves the declared support"));
            }
        }
        let traj = evolve_multiplicative(y0, windows, t_final, cn)?;
        let strip_norm = traj.final_grid.norm_l2_on(strip);
        samples.push(StripSample {
            sample_id: id as u64,
            strip_norm,
            pass: strip_norm >= floor - comparison_tol,
        });
    }
    Ok(StripReport { floor, comparison_tol, samples })
}

/// Seeded randomized strip suite with bounded bilinear controls.
#[allow(clippy::too_many_arguments)]
pub fn strip_obstruction_suite(
    y0: &GridFunction,
    omega: &Interval,
    strip: &Interval,
    t_final: f64,
    n_samples: usize,
    seed: u64,
    v_bound: f64,
    cn: &CnOptions,
    comparison_tol: f64,
) -> CoreResult<StripReport> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut controls = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        controls.push(random_reaction_windows(
            &mut rng,
            t_final,
            omega,
            y0.n_points(),
            8,
            6,
            v_bound,
        )?);
    }
    verify_strip_obstruction(y0, omega, strip, t_final, &controls, cn, comparison_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn floor_matches_single_strip_mode() {
        // y0 = sin(π(x-α)/L) on the strip: floor = e^{-(π/L)² T}·√(L/2)
        let strip = Interval::new(0.6, 0.9).unwrap();
        let len = strip.length();
        let y0 = GridFunction::from_fn(2049, |x| {
            if strip.contains(x) {
                (PI * (x - 0.6) / len).sin()
            } else {
                0.0
            }
        });
        let t = 0.01;
        let floor = strip_floor(&y0, &strip, t, 32);
        let expect = (-(PI / len).powi(2) * t).exp() * (len / 2.0).sqrt();
        assert_relative_eq!(floor, expect, max_relative = 1e-4);
    }

    #[test]
    fn free_run_stays_above_floor() {
        // no control at all: boundary influx makes the inequality strict
        let y0 = GridFunction::from_fn(1025, |x| (PI * x).sin());
        let strip = Interval::new(0.6, 0.9).unwrap();
        let omega = Interval::new(0.0, 0.4).unwrap();
        let cn = CnOptions { dt: 1e-4, ..CnOptions::default() };
        let report =
            verify_strip_obstruction(&y0, &omega, &strip, 0.1, &[vec![]], &cn, 1e-4).unwrap();
        assert!(report.all_pass());
        assert!(report.samples[0].strip_norm > report.floor, "should be strict");
    }

    #[test]
    fn zero_restriction_gives_vacuous_floor() {
        // y0 vanishes on the strip and ω is far away with tiny T
        let y0 = GridFunction::from_fn(513, |x| {
            let s: f64 = (x - 0.2) / 0.1;
            if s.abs() < 1.0 {
                (1.0 - s * s).powi(2)
            } else {
                0.0
            }
        });
        let strip = Interval::new(0.7, 0.9).unwrap();
        let floor = strip_floor(&y0, &strip, 1e-3, 32);
        assert!(floor <= 1e-12, "floor {floor}");
    }

    #[test]
    fn randomized_controls_respect_floor() {
        let y0 = GridFunction::from_fn(513, |x| (PI * x).sin());
        let strip = Interval::new(0.6, 0.9).unwrap();
        let omega = Interval::new(0.0, 0.4).unwrap();
        let cn = CnOptions { dt: 2e-4, ..CnOptions::default() };
        let report =
            strip_obstruction_suite(&y0, &omega, &strip, 0.05, 5, 31337, 50.0, &cn, 1e-4).unwrap();
        assert!(report.all_pass(), "min norm {} floor {}", report.min_strip_norm(), report.floor);
    }

    #[test]
    fn overlapping_strip_is_rejected() {
        let y0 = GridFunction::from_fn(65, |x| (PI * x).sin());
        let strip = Interval::new(0.3, 0.6).unwrap();
        let omega = Interval::new(0.0, 0.4).unwrap();
        let cn = CnOptions::default();
        assert!(verify_strip_obstruction(&y0, &omega, &strip, 0.1, &[], &cn, 1e-4).is_err());
    }
}
