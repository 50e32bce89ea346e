//! Boundary-control obstruction.
//!
//! `p(x,t) = -e^{9π²(t-T)} sin(3πx)` solves the homogeneous backward
//! problem with `p(·,T) = -sin(3πx)` and has signed fluxes
//! `p_x(0,t) = -3π e^{9π²(t-T)} < 0`, `p_x(1,t) = +3π e^{9π²(t-T)} > 0`.
//! Pairing the transposition solution against `p` gives
//!
//! `∫ y(T) p(·,T) = ∫ u0 p_x(0,·) - ∫ u1 p_x(1,·) ≤ 0`
//!
//! for nonnegative boundary data, so `y_d = max(p(·,T), 0)` is
//! unreachable, with an explicit Cauchy-Schwarz gap.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{CoreError, CoreResult};
use crate::field::GridFunction;
use crate::obstruction::sampling::random_boundary_signal;
use crate::obstruction::{ObstructionReport, SampleOutcome};
use crate::solver::{evolve_boundary, BoundarySignal};

/// The closed-form boundary certificate (third sine mode).
#[derive(Debug, Clone, Copy)]
pub struct BoundaryAdjoint {
    pub t_final: f64,
}

impl BoundaryAdjoint {
    pub fn new(t_final: f64) -> CoreResult<Self> {
        if !(t_final > 0.0) {
            return Err(CoreError::invalid("t_final", "need t_final > 0"));
        }
        Ok(BoundaryAdjoint { t_final })
    }

    pub fn p(&self, x: f64, t: f64) -> f64 {
        -(9.0 * PI * PI * (t - self.t_final)).exp() * (3.0 * PI * x).sin()
    }

    pub fn flux_left(&self, t: f64) -> f64 {
        -3.0 * PI * (9.0 * PI * PI * (t - self.t_final)).exp()
    }

    pub fn flux_right(&self, t: f64) -> f64 {
        3.0 * PI * (9.0 * PI * PI * (t - self.t_final)).exp()
    }

    /// The unreachable target `max(p(·,T), 0) = max(-sin(3πx), 0)`.
    pub fn target(&self, n_points: usize) -> GridFunction {
        GridFunction::from_fn(n_points, |x| (-(3.0 * PI * x).sin()).max(0.0))
    }

    /// `∫_0^{t1} e^{9π²(t-T)} dt - ∫_0^{t0} …`, the exact flux weight of a
    /// `[t0, t1]` window.
    fn flux_weight(&self, t0: f64, t1: f64) -> f64 {
        let mu = 9.0 * PI * PI;
        ((mu * (t1 - self.t_final)).exp() - (mu * (t0 - self.t_final)).exp()) / mu
    }

    /// Worst sampled residual of `-p_t - p_xx = 0`.
    ///
    /// `p = φ(x) E(t)` with `0 < E ≤ 1` on `[0,T]`, so the space-time
    /// residual is `E(t)` times the spatial one, `-μφ - φ''` with
    /// `μ = 9π²`; a Richardson-extrapolated second difference checks it.
    pub fn pde_residual(&self, n_x: usize) -> f64 {
        let hx = 1.5e-3;
        let mu = 9.0 * PI * PI;
        let phi = |x: f64| -(3.0 * PI * x).sin();
        let mut worst = 0.0f64;
        for i in 1..n_x {
            let x = i as f64 / n_x as f64;
            if !(3.0 * hx..=1.0 - 3.0 * hx).contains(&x) {
                continue;
            }
            let d2 = |h: f64| (phi(x - h) - 2.0 * phi(x) + phi(x + h)) / (h * h);
            let phi_xx = (4.0 * d2(hx / 2.0) - d2(hx)) / 3.0;
            worst = worst.max((-mu * phi(x) - phi_xx).abs());
        }
        worst
    }
}

/// Cauchy-Schwarz floor for the boundary case:
/// `(∫ y_d p(·,T)) / ‖p(·,T)‖ = (1/6)/√(1/2)`.
pub fn boundary_gap_lower_bound() -> f64 {
    (1.0 / 6.0) / 0.5f64.sqrt()
}

/// One signal paired against the certificate.
#[derive(Debug, Clone)]
pub struct BoundaryPairing {
    /// `∫ y(T) p(·,T) dx`, computed from the transposition series.
    pub lhs: f64,
    /// `∫ u0 p_x(0,·) - ∫ u1 p_x(1,·)`, exact per window.
    pub rhs: f64,
    pub residual: f64,
    pub distance: f64,
}

/// Evaluates the pairing identity for nonnegative boundary data.
pub fn boundary_pairing(
    adjoint: &BoundaryAdjoint,
    signal: &BoundarySignal,
    k_max: usize,
    n_grid: usize,
) -> CoreResult<BoundaryPairing> {
    if !signal.is_nonnegative() {
        return Err(CoreError::invalid("signal", "boundary data must be nonnegative"));
    }
    let ev = evolve_boundary(signal, adjoint.t_final, k_max)?;
    // ∫ 2 Σ a_k sin(kπx) · (-sin(3πx)) dx = -a_3
    let lhs = -ev.state.coeff(3);
    let mut rhs = 0.0;
    for w in signal.windows() {
        let weight = adjoint.flux_weight(
            w.t_start.clamp(0.0, adjoint.t_final),
            w.t_end.clamp(0.0, adjoint.t_final),
        );
        rhs += -3.0 * PI * weight * (w.u0 + w.u1);
    }
    let distance = ev.state.evaluate(n_grid).l2_distance(&adjoint.target(n_grid));
    Ok(BoundaryPairing { lhs, rhs, residual: (lhs - rhs).abs(), distance })
}

/// Seeded randomized suite for the boundary certificate.
pub fn boundary_obstruction_suite(
    t_final: f64,
    n_samples: usize,
    seed: u64,
    k_max: usize,
    n_grid: usize,
    identity_tol: f64,
    pairing_tol: f64,
) -> CoreResult<ObstructionReport> {
    let adjoint = BoundaryAdjoint::new(t_final)?;
    let gap = boundary_gap_lower_bound();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_samples);
    for id in 0..n_samples {
        let signal = random_boundary_signal(&mut rng, t_final, 8, 1.5)?;
        let pairing = boundary_pairing(&adjoint, &signal, k_max, n_grid)?;
        let pass = pairing.residual <= identity_tol
            && pairing.rhs <= pairing_tol
            && pairing.distance >= gap - 1e-3;
        samples.push(SampleOutcome {
            sample_id: id as u64,
            lhs: pairing.lhs,
            rhs: pairing.rhs,
            residual: pairing.residual,
            distance: pairing.distance,
            pass,
        });
    }
    Ok(ObstructionReport { gap_lower_bound: gap, identity_tol, pairing_tol, samples })
}
