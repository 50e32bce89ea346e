//! Seeded random controls for the obstruction suites.
//!
//! Sampling is deliberately simple and fully reproducible (ChaCha12, one
//! 64-bit seed): piecewise-constant in time over a fixed number of
//! windows; spatial profiles are random low-order sine polynomials in the
//! support-local coordinate, clipped to the required sign.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::CoreResult;
use crate::field::{GridFunction, Interval};
use crate::solver::{BoundarySignal, BoundaryWindow, ReactionWindow, SourceWindow};

fn trig_profile(
    rng: &mut ChaCha12Rng,
    n_grid: usize,
    support: &Interval,
    modes: usize,
) -> Vec<f64> {
    let coeffs: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (lo, len) = (support.lo(), support.length());
    let h = 1.0 / (n_grid - 1) as f64;
    (0..n_grid)
        .map(|i| {
            let x = i as f64 * h;
            if !support.contains(x) {
                return 0.0;
            }
            let s = (x - lo) / len;
            coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c * ((j + 1) as f64 * std::f64::consts::PI * s).sin())
                .sum()
        })
        .collect()
}

/// Nonnegative piecewise-constant-in-time control supported in `support`:
/// per window, the positive part of a random sine polynomial, scaled by a
/// random amplitude below `amp`.
pub fn random_source_windows(
    rng: &mut ChaCha12Rng,
    t_final: f64,
    support: &Interval,
    n_grid: usize,
    n_windows: usize,
    modes: usize,
    amp: f64,
) -> CoreResult<Vec<SourceWindow>> {
    let mut out = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let t0 = t_final * w as f64 / n_windows as f64;
        let t1 = t_final * (w + 1) as f64 / n_windows as f64;
        let amplitude = rng.gen_range(0.0..amp);
        let values: Vec<f64> =
            trig_profile(rng, n_grid, support, modes).into_iter().map(|v| v.max(0.0)).collect();
        out.push(SourceWindow::new(t0, t1, amplitude, GridFunction::new(values)?, *support)?);
    }
    Ok(out)
}

/// Bounded (both signs) piecewise-constant-in-time reaction coefficient
/// supported in `support`, `|v| ≤ bound`.
pub fn random_reaction_windows(
    rng: &mut ChaCha12Rng,
    t_final: f64,
    support: &Interval,
    n_grid: usize,
    n_windows: usize,
    modes: usize,
    bound: f64,
) -> CoreResult<Vec<ReactionWindow>> {
    let mut out = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let t0 = t_final * w as f64 / n_windows as f64;
        let t1 = t_final * (w + 1) as f64 / n_windows as f64;
        let scale = rng.gen_range(0.0..bound);
        let values: Vec<f64> = trig_profile(rng, n_grid, support, modes)
            .into_iter()
            .map(|v| (scale * v).clamp(-bound, bound))
            .collect();
        out.push(ReactionWindow::with_profile(t0, t1, GridFunction::new(values)?, *support)?);
    }
    Ok(out)
}

/// Nonnegative piecewise-constant boundary pair on `n_windows` windows.
pub fn random_boundary_signal(
    rng: &mut ChaCha12Rng,
    t_final: f64,
    n_windows: usize,
    amp: f64,
) -> CoreResult<BoundarySignal> {
    let windows = (0..n_windows)
        .map(|w| BoundaryWindow {
            t_start: t_final * w as f64 / n_windows as f64,
            t_end: t_final * (w + 1) as f64 / n_windows as f64,
            u0: rng.gen_range(0.0..amp),
            u1: rng.gen_range(0.0..amp),
        })
        .collect();
    BoundarySignal::new(windows)
}

/// Smooth nonnegative initial state with compact support: a random
/// superposition of C² bumps placed away from the endpoints.
pub fn random_smooth_nonneg(rng: &mut ChaCha12Rng, n_grid: usize, n_bumps: usize) -> GridFunction {
    let bumps: Vec<(f64, f64, f64)> = (0..n_bumps.max(1))
        .map(|_| {
            let center = rng.gen_range(0.25..0.75);
            let width = rng.gen_range(0.08..0.2);
            let height = rng.gen_range(0.2..1.0);
            (center, width, height)
        })
        .collect();
    GridFunction::from_fn(n_grid, |x| {
        bumps
            .iter()
            .map(|(c, w, a)| {
                let s = (x - c) / w;
                if s.abs() < 1.0 {
                    a * (1.0 - s * s).powi(3)
                } else {
                    0.0
                }
            })
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn source_windows_are_nonneg_and_confined() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let support = Interval::new(0.6, 0.9).unwrap();
        let ws = random_source_windows(&mut rng, 1.0, &support, 257, 8, 6, 2.0).unwrap();
        assert_eq!(ws.len(), 8);
        for w in &ws {
            assert!(w.profile.min_value() >= 0.0);
            assert_eq!(w.profile.sup_outside(&support), 0.0);
            assert!(w.amplitude >= 0.0);
        }
        // windows tile [0, 1]
        assert_eq!(ws[0].t_start, 0.0);
        assert_eq!(ws[7].t_end, 1.0);
    }

    #[test]
    fn reaction_windows_respect_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let support = Interval::new(0.0, 0.4).unwrap();
        let ws = random_reaction_windows(&mut rng, 0.1, &support, 257, 4, 5, 50.0).unwrap();
        for w in &ws {
            if let crate::solver::ReactionCoefficient::Profile(g) = &w.coefficient {
                assert!(g.sup_norm() <= 50.0);
                assert_eq!(g.sup_outside(&support), 0.0);
            } else {
                panic!("expected profile coefficient");
            }
        }
    }

    #[test]
    fn smooth_states_are_smooth_enough() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let y0 = random_smooth_nonneg(&mut rng, 513, 3);
        assert!(y0.is_nonnegative(0.0));
        assert!(y0.is_dirichlet(1e-15));
        assert!(y0.sup_norm() > 0.0);
    }

    #[test]
    fn same_seed_same_samples() {
        let support = Interval::new(0.6, 0.9).unwrap();
        let mut a = ChaCha12Rng::seed_from_u64(99);
        let mut b = ChaCha12Rng::seed_from_u64(99);
        let wa = random_source_windows(&mut a, 1.0, &support, 129, 3, 4, 1.0).unwrap();
        let wb = random_source_windows(&mut b, 1.0, &support, 129, 3, 4, 1.0).unwrap();
        for (x, y) in wa.iter().zip(&wb) {
            assert_eq!(x.amplitude.to_bits(), y.amplitude.to_bits());
            assert_eq!(x.profile.values(), y.profile.values());
        }
    }
}
