//! Static-support obstruction for the additive system.
//!
//! For a support `ω ⊂ (1/m, 1)` the function
//! `p(x,t) = φ(x) exp(m²π²(t-T)/(m-1)²)` with
//!
//! ```text
//! φ(x) = sin(mπx)                          on [0, 1/m),
//!        (1-m) sin(π(mx-1)/(m-1))          on [1/m, 1],
//! ```
//!
//! solves the backward problem `-p_t = p_xx + h` with a nonnegative
//! forcing `h` supported left of `1/m`, and `p ≤ 0` on `[1/m,1]×[0,T]`.
//! Pairing the additive dynamics against `p` gives, for every
//! nonnegative control supported in `ω`,
//!
//! `∫ y(T) φ ≤ ∫ y(T) φ + ∬ h y = ∬ u p ≤ 0`,
//!
//! so the nonnegative target `y_d = max(φ, 0)` keeps L² distance at least
//! `(∫ y_d φ)/‖φ‖ = (1/2m)/‖φ‖` from every reachable state.

use std::f64::consts::PI;

use crate::error::{CoreError, CoreResult};
use crate::field::{GridFunction, SineSeries};
use crate::numerics::{exp_integral, sine_product_integral};
use crate::obstruction::sampling::random_source_windows;
use crate::obstruction::{ObstructionReport, SampleOutcome};
use crate::solver::spectral::{additive_segments, lambda, state_on_segments};
use crate::solver::SourceWindow;
use crate::field::Interval;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The closed-form adjoint certificate for one `m ≥ 2`.
#[derive(Debug, Clone, Copy)]
pub struct StaticAdjoint {
    m: usize,
    t_final: f64,
}

pub fn build_static_adjoint(m: usize, t_final: f64) -> CoreResult<StaticAdjoint> {
    if m < 2 {
        return Err(CoreError::invalid("m", format!("need m >= 2, got {m}")));
    }
    if !(t_final > 0.0) {
        return Err(CoreError::invalid("t_final", "need t_final > 0"));
    }
    Ok(StaticAdjoint { m, t_final })
}

impl StaticAdjoint {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Decay rate `μ = m²π²/(m-1)²` of the certificate.
    pub fn mu(&self) -> f64 {
        let m = self.m as f64;
        m * m * PI * PI / ((m - 1.0) * (m - 1.0))
    }

    /// Terminal profile `φ`.
    pub fn phi(&self, x: f64) -> f64 {
        let m = self.m as f64;
        if x < 1.0 / m {
            (m * PI * x).sin()
        } else {
            (1.0 - m) * (PI * (m * x - 1.0) / (m - 1.0)).sin()
        }
    }

    /// Prefactor of the forcing, `(m-2)m³π²/(m-1)²`; zero exactly at `m = 2`.
    pub fn h_prefactor(&self) -> f64 {
        let m = self.m as f64;
        (m - 2.0) * m * m * m * PI * PI / ((m - 1.0) * (m - 1.0))
    }

    /// Forcing `h(x,t) ≥ 0`, supported on `[0, 1/m)`.
    pub fn h(&self, x: f64, t: f64) -> f64 {
        let m = self.m as f64;
        if x < 1.0 / m {
            self.h_prefactor() * (m * PI * x).sin() * (self.mu() * (t - self.t_final)).exp()
        } else {
            0.0
        }
    }

    /// The certificate itself.
    pub fn p(&self, x: f64, t: f64) -> f64 {
        self.phi(x) * (self.mu() * (t - self.t_final)).exp()
    }

    /// `φ_k = ∫_0^1 φ(x) sin(kπx) dx`, exact.
    pub fn phi_coeff(&self, k: usize) -> f64 {
        let m = self.m as f64;
        let left = sine_product_integral(m * PI, 0.0, k, 0.0, 1.0 / m);
        let right = (1.0 - m)
            * sine_product_integral(m * PI / (m - 1.0), -PI / (m - 1.0), k, 1.0 / m, 1.0);
        left + right
    }

    /// `∫_0^{1/m} sin(mπx) sin(kπx) dx`, the spatial factor of `h`.
    pub fn h_space_coeff(&self, k: usize) -> f64 {
        sine_product_integral(self.m as f64 * PI, 0.0, k, 0.0, 1.0 / self.m as f64)
    }

    /// `‖φ‖²_{L²} = (1 + (m-1)³)/(2m)`, closed form.
    pub fn phi_norm_sq(&self) -> f64 {
        let m = self.m as f64;
        (1.0 + (m - 1.0).powi(3)) / (2.0 * m)
    }

    /// The unreachable target `y_d = max(φ, 0)` on a grid.
    pub fn target(&self, n_points: usize) -> GridFunction {
        GridFunction::from_fn(n_points, |x| self.phi(x).max(0.0))
    }

    /// `∫ y_d φ = 1/(2m)`, the pairing mass of the target.
    pub fn target_pairing(&self) -> f64 {
        1.0 / (2.0 * self.m as f64)
    }

    /// Worst sampled residual of `-p_t - p_xx - h`.
    ///
    /// The certificate factors as `p = φ(x) E(t)` with `0 < E ≤ 1` on
    /// `[0,T]`, so the space-time residual equals `E(t)` times the spatial
    /// residual `-μφ - φ'' - h̃`; checking the latter with a
    /// Richardson-extrapolated second difference bounds the former
    /// everywhere. Points within a few stencil widths of the branch
    /// junction are skipped (φ is C¹ there; one-sided third derivatives
    /// differ).
    pub fn pde_residual(&self, n_x: usize) -> f64 {
        let hx = 1.5e-3;
        let mu = self.mu();
        let junction = 1.0 / self.m as f64;
        let h_spatial = |x: f64| {
            if x < junction {
                self.h_prefactor() * (self.m as f64 * PI * x).sin()
            } else {
                0.0
            }
        };
        let mut worst = 0.0f64;
        for i in 1..n_x {
            let x = i as f64 / n_x as f64;
            if (x - junction).abs() < 3.0 * hx || x < 3.0 * hx || x > 1.0 - 3.0 * hx {
                continue;
            }
            let d2 = |h: f64| (self.phi(x - h) - 2.0 * self.phi(x) + self.phi(x + h)) / (h * h);
            let phi_xx = (4.0 * d2(hx / 2.0) - d2(hx)) / 3.0;
            worst = worst.max((-mu * self.phi(x) - phi_xx - h_spatial(x)).abs());
        }
        worst
    }
}

/// Cauchy-Schwarz floor `(∫ y_d φ)/‖φ‖` on the distance from any
/// reachable state to the certificate's target.
pub fn unreachability_gap(adjoint: &StaticAdjoint) -> f64 {
    adjoint.target_pairing() / adjoint.phi_norm_sq().sqrt()
}

/// Result of pairing one control against the certificate.
#[derive(Debug, Clone)]
pub struct StaticPairing {
    /// `∫ y(T) φ + ∬ h y`.
    pub lhs: f64,
    /// `∫ y(T) φ` alone.
    pub terminal_term: f64,
    /// `∬ u p`.
    pub rhs: f64,
    pub residual: f64,
    pub final_state: SineSeries,
}

/// Evaluates both sides of the duality identity for a control given as
/// source windows. Everything is exact in mode space: the trajectory, the
/// time integrals of the exponential weight, and the sine-product
/// integrals of `φ` and `h`.
pub fn duality_pairing_static(
    adjoint: &StaticAdjoint,
    windows: &[SourceWindow],
    k_max: usize,
) -> CoreResult<StaticPairing> {
    let lo_limit = 1.0 / adjoint.m as f64;
    for w in windows {
        if w.support.lo() < lo_limit - 1e-12 {
            return Err(CoreError::SupportViolation {
                mass: f64::INFINITY,
                lo: w.support.lo(),
                hi: w.support.hi(),
            });
        }
        if w.amplitude < 0.0 || w.profile.min_value() < -1e-12 {
            return Err(CoreError::invalid("windows", "pairing requires nonnegative controls"));
        }
    }
    let t_final = adjoint.t_final;
    let mu = adjoint.mu();
    let segments = additive_segments(&SineSeries::zeros(k_max), windows, t_final, k_max)?;

    let phi_k: Vec<f64> = (1..=k_max).map(|k| adjoint.phi_coeff(k)).collect();
    let h_k: Vec<f64> = (1..=k_max).map(|k| adjoint.h_space_coeff(k)).collect();
    let pre = adjoint.h_prefactor();

    let final_state = state_on_segments(&segments, t_final);
    let terminal_term: f64 =
        2.0 * final_state.coeffs().iter().zip(&phi_k).map(|(a, p)| a * p).sum::<f64>();

    let mut interior = 0.0;
    let mut rhs = 0.0;
    for seg in &segments {
        let span = seg.t_end - seg.t_start;
        let e0 = (mu * (seg.t_start - t_final)).exp();
        // ∬ u p over the segment: (2 Σ c_k φ_k) ∫ E
        let u_phi: f64 =
            2.0 * seg.source_coeffs.iter().zip(&phi_k).map(|(c, p)| c * p).sum::<f64>();
        rhs += u_phi * e0 * exp_integral(mu, span);
        // ∬ h y over the segment: 2 pre Σ_k I1_k ∫ E a_k(t) dt
        for k in 1..=k_max {
            let lam = lambda(k);
            let alpha = seg.start_coeffs[k - 1];
            let beta = seg.source_coeffs[k - 1] / lam;
            let integral = e0
                * ((alpha - beta) * exp_integral(mu - lam, span) + beta * exp_integral(mu, span));
            interior += 2.0 * pre * h_k[k - 1] * integral;
        }
    }
    let lhs = terminal_term + interior;
    Ok(StaticPairing { lhs, terminal_term, rhs, residual: (lhs - rhs).abs(), final_state })
}

/// Runs `n_samples` seeded random nonnegative controls supported in
/// `omega` against the certificate and aggregates outcomes.
pub fn static_obstruction_suite(
    m: usize,
    omega: Interval,
    t_final: f64,
    n_samples: usize,
    seed: u64,
    k_max: usize,
    n_grid: usize,
    identity_tol: f64,
    pairing_tol: f64,
) -> CoreResult<ObstructionReport> {
    let adjoint = build_static_adjoint(m, t_final)?;
    if omega.lo() < 1.0 / m as f64 {
        return Err(CoreError::invalid(
            "omega",
            format!("support must sit inside (1/m, 1) = ({}, 1)", 1.0 / m as f64),
        ));
    }
    let gap = unreachability_gap(&adjoint);
    let target = adjoint.target(n_grid);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_samples);
    for id in 0..n_samples {
        let windows = random_source_windows(&mut rng, t_final, &omega, n_grid, 8, 6, 2.0)?;
        let pairing = duality_pairing_static(&adjoint, &windows, k_max)?;
        let distance = pairing.final_state.evaluate(n_grid).l2_distance(&target);
        let pass = pairing.residual <= identity_tol
            && pairing.rhs <= pairing_tol
            && distance >= gap - 1e-3;
        samples.push(SampleOutcome {
            sample_id: id as u64,
            lhs: pairing.lhs,
            rhs: pairing.rhs,
            residual: pairing.residual,
            distance,
            pass,
        });
    }
    Ok(ObstructionReport { gap_lower_bound: gap, identity_tol, pairing_tol, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phi_branches_at_m_two() {
        let adj = build_static_adjoint(2, 1.0).unwrap();
        assert_relative_eq!(adj.phi(0.25), (2.0 * PI * 0.25).sin(), epsilon = 1e-15);
        // second branch: -sin(π(2x-1)) on [1/2, 1]
        assert_relative_eq!(adj.phi(0.75), -(PI * 0.5).sin(), epsilon = 1e-15);
        // C¹ junction: both one-sided slopes equal -mπ
        let h = 1e-7;
        let left = (adj.phi(0.5 - h) - adj.phi(0.5 - 2.0 * h)) / h;
        let right = (adj.phi(0.5 + 2.0 * h) - adj.phi(0.5 + h)) / h;
        assert_relative_eq!(left, -2.0 * PI, epsilon = 1e-5);
        assert_relative_eq!(right, -2.0 * PI, epsilon = 1e-5);
        assert!(build_static_adjoint(1, 1.0).is_err());
    }

    #[test]
    fn forcing_sign_and_prefactor() {
        // m = 2: prefactor vanishes, h ≡ 0
        let adj2 = build_static_adjoint(2, 1.0).unwrap();
        assert_eq!(adj2.h_prefactor(), 0.0);
        assert_eq!(adj2.h(0.2, 0.5), 0.0);
        // m = 3: prefactor = 27π²/4, h ≥ 0 everywhere sampled
        let adj3 = build_static_adjoint(3, 1.0).unwrap();
        assert_relative_eq!(adj3.h_prefactor(), 27.0 * PI * PI / 4.0, epsilon = 1e-12);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            for j in 0..=10 {
                let t = j as f64 / 10.0;
                assert!(adj3.h(x, t) >= 0.0);
            }
        }
    }

    #[test]
    fn p_nonpositive_right_of_junction() {
        for m in [2usize, 3, 5] {
            let adj = build_static_adjoint(m, 0.7).unwrap();
            for i in 0..=200 {
                let x = 1.0 / m as f64 + (1.0 - 1.0 / m as f64) * i as f64 / 200.0;
                for j in 0..=10 {
                    let t = 0.7 * j as f64 / 10.0;
                    assert!(adj.p(x, t) <= 1e-15, "p({x},{t}) = {}", adj.p(x, t));
                }
            }
        }
    }

    #[test]
    fn closed_form_satisfies_the_backward_pde() {
        for m in [2usize, 3] {
            let adj = build_static_adjoint(m, 0.5).unwrap();
            let r = adj.pde_residual(97);
            assert!(r <= 1e-8, "m = {m}: residual {r}");
        }
    }

    #[test]
    fn coefficient_identity_ties_h_to_phi() {
        // mode-wise consistency of the closed forms:
        // pre·I1_k = (λ_k - μ) φ_k for every k
        for m in [2usize, 3, 4] {
            let adj = build_static_adjoint(m, 1.0).unwrap();
            for k in 1..=32 {
                let lhs = adj.h_prefactor() * adj.h_space_coeff(k);
                let rhs = (lambda(k) - adj.mu()) * adj.phi_coeff(k);
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()),
                    "m={m} k={k}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn phi_norm_matches_quadrature() {
        for m in [2usize, 3, 5] {
            let adj = build_static_adjoint(m, 1.0).unwrap();
            let grid = GridFunction::from_fn(8193, |x| adj.phi(x));
            assert_relative_eq!(
                grid.norm_l2().powi(2),
                adj.phi_norm_sq(),
                max_relative = 1e-6
            );
        }
        // m = 2 closed values: ‖φ‖² = 1/2, gap = 0.25/√0.5
        let adj = build_static_adjoint(2, 1.0).unwrap();
        assert_relative_eq!(adj.phi_norm_sq(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(adj.target_pairing(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(unreachability_gap(&adj), 0.25 / 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(unreachability_gap(&adj) > 0.0);
        // target pairing against quadrature: ∫ y_d φ = 1/(2m)
        let target = adj.target(8193);
        let phi = GridFunction::from_fn(8193, |x| adj.phi(x));
        assert_relative_eq!(target.inner_l2(&phi), 0.25, max_relative = 1e-6);
    }

    #[test]
    fn constant_block_control_pairs_negative() {
        // u ≡ 1 on (0.6, 0.9) × (0, 1), m = 2: rhs strictly negative
        let adj = build_static_adjoint(2, 1.0).unwrap();
        let omega = Interval::new(0.6, 0.9).unwrap();
        let profile = GridFunction::from_fn(1025, |x| {
            if omega.contains(x) {
                1.0
            } else {
                0.0
            }
        });
        let w = SourceWindow::new(0.0, 1.0, 1.0, profile, omega).unwrap();
        let pairing = duality_pairing_static(&adj, &[w], 128).unwrap();
        assert!(pairing.rhs < -1e-3, "rhs = {}", pairing.rhs);
        assert!(pairing.residual <= 1e-9, "residual = {}", pairing.residual);
        assert!(pairing.terminal_term <= 1e-9);
    }

    #[test]
    fn zero_control_pairs_to_zero() {
        let adj = build_static_adjoint(2, 1.0).unwrap();
        let pairing = duality_pairing_static(&adj, &[], 64).unwrap();
        assert_eq!(pairing.lhs, 0.0);
        assert_eq!(pairing.rhs, 0.0);
    }

    #[test]
    fn rejects_support_left_of_the_junction() {
        let adj = build_static_adjoint(2, 1.0).unwrap();
        let bad = Interval::new(0.3, 0.7).unwrap();
        let profile = GridFunction::from_fn(257, |x| if bad.contains(x) { 1.0 } else { 0.0 });
        let w = SourceWindow::new(0.0, 1.0, 1.0, profile, bad).unwrap();
        assert!(duality_pairing_static(&adj, &[w], 32).is_err());
    }

    #[test]
    fn seeded_suite_passes_and_reproduces() {
        let omega = Interval::new(0.6, 0.9).unwrap();
        let r1 =
            static_obstruction_suite(2, omega, 1.0, 10, 42, 128, 1025, 1e-6, 1e-6).unwrap();
        assert!(r1.all_pass(), "max residual {}", r1.max_residual());
        assert!(r1.min_distance() >= unreachability_gap(&build_static_adjoint(2, 1.0).unwrap()) - 1e-3);
        let r2 =
            static_obstruction_suite(2, omega, 1.0, 10, 42, 128, 1025, 1e-6, 1e-6).unwrap();
        for (a, b) in r1.samples.iter().zip(&r2.samples) {
            assert_eq!(a.lhs.to_bits(), b.lhs.to_bits());
            assert_eq!(a.rhs.to_bits(), b.rhs.to_bits());
        }
    }
}
