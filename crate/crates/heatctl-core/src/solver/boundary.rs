//! Transposition solution of the boundary-controlled heat equation.
//!
//! For piecewise-constant boundary values the series coefficients
//!
//! `b_k(t) = √2 kπ ∫_0^t e^{-k²π²(t-s)} (u0(s) + (-1)^{k+1} u1(s)) ds`
//!
//! integrate in closed form window by window. The state
//! `y = Σ b_k √2 sin(kπx)` converts to this crate's convention through
//! `a_k = b_k / √2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::SineSeries;
use crate::solver::spectral::lambda;

/// One hold interval of the boundary values.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundaryWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub u0: f64,
    pub u1: f64,
}

/// Piecewise-constant boundary data; gaps between windows mean zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundarySignal {
    windows: Vec<BoundaryWindow>,
}

impl BoundarySignal {
    pub fn new(mut windows: Vec<BoundaryWindow>) -> CoreResult<Self> {
        windows.sort_by(|a, b| a.t_start.partial_cmp(&b.t_start).expect("finite times"));
        let mut prev_end = f64::NEG_INFINITY;
        for w in &windows {
            if !(w.t_start.is_finite() && w.t_end.is_finite() && w.t_start < w.t_end) {
                return Err(CoreError::invalid("windows", "need t_start < t_end"));
            }
            if !(w.u0.is_finite() && w.u1.is_finite()) {
                return Err(CoreError::invalid("windows", "boundary values must be finite"));
            }
            if w.t_start < prev_end - 1e-12 {
                return Err(CoreError::WindowOverlap { t: w.t_start });
            }
            prev_end = w.t_end;
        }
        Ok(BoundarySignal { windows })
    }

    /// Constant `(u0, u1)` on `[0, t_final]`.
    pub fn constant(u0: f64, u1: f64, t_final: f64) -> CoreResult<Self> {
        BoundarySignal::new(vec![BoundaryWindow { t_start: 0.0, t_end: t_final, u0, u1 }])
    }

    pub fn windows(&self) -> &[BoundaryWindow] {
        &self.windows
    }

    pub fn sup_u0(&self) -> f64 {
        self.windows.iter().fold(0.0f64, |m, w| m.max(w.u0.abs()))
    }

    pub fn sup_u1(&self) -> f64 {
        self.windows.iter().fold(0.0f64, |m, w| m.max(w.u1.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.windows.iter().all(|w| w.u0 >= 0.0 && w.u1 >= 0.0)
    }
}

/// Result of a transposition evolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryEvolution {
    /// Final state in the `2 Σ a_k sin(kπx)` convention.
    pub state: SineSeries,
    /// `Σ_k b_k(T)²` over the truncated sum.
    pub coeff_energy: f64,
    /// `(2/π²)(‖u0‖_∞ + ‖u1‖_∞)² Σ_{k ≤ N} 1/k²`, the finiteness bound the
    /// truncated energy must respect.
    pub energy_bound: f64,
}

/// Evaluates the transposition series at `t_final`.
pub fn evolve_boundary(
    signal: &BoundarySignal,
    t_final: f64,
    k_max: usize,
) -> CoreResult<BoundaryEvolution> {
    if !(t_final > 0.0) {
        return Err(CoreError::invalid("t_final", "need t_final > 0"));
    }
    if k_max < 1 {
        return Err(CoreError::invalid("k_max", "need k_max >= 1"));
    }
    let sqrt2 = 2.0f64.sqrt();
    let mut b = vec![0.0f64; k_max];
    for (i, bk) in b.iter_mut().enumerate() {
        let k = i + 1;
        let lam = lambda(k);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 }; // (-1)^{k+1}
        let mut acc = 0.0;
        for w in &signal.windows {
            let t0 = w.t_start.clamp(0.0, t_final);
            let t1 = w.t_end.clamp(0.0, t_final);
            if t1 <= t0 {
                continue;
            }
            let drive = w.u0 + sign * w.u1;
            // ∫_{t0}^{t1} e^{-λ(T - s)} ds
            acc += drive * ((-lam * (t_final - t1)).exp() - (-lam * (t_final - t0)).exp()) / lam;
        }
        *bk = sqrt2 * k as f64 * PI * acc;
    }
    let coeff_energy: f64 = b.iter().map(|x| x * x).sum();
    let harmonic: f64 = (1..=k_max).map(|k| 1.0 / (k * k) as f64).sum();
    let sup_sum = signal.sup_u0() + signal.sup_u1();
    let energy_bound = 2.0 / (PI * PI) * sup_sum * sup_sum * harmonic;
    let state = SineSeries::new(b.iter().map(|bk| bk / sqrt2).collect())?;
    Ok(BoundaryEvolution { state, coeff_energy, energy_bound })
}
