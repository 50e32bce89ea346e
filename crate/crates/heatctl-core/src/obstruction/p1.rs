//! Derivative bounds for time-independent nonpositive reaction.
//!
//! For smooth nonnegative compactly supported data and `v(x) ≤ 0`, the
//! solution of `y_t = y_xx + v y` obeys three bounds driven entirely by
//! the initial state:
//!
//! - (a) `y_t ≤ max (y0'')⁺` everywhere in space-time,
//! - (b) `0 ≤ y_x(0,t) ≤ e · max (y0' e^{y0})`,
//! - (c) `e · min (y0' e^{y0}) ≤ y_x(1,t) ≤ 0`.
//!
//! The checks run on a Crank-Nicolson trajectory with all derivatives
//! taken discretely: `y_t` through the PDE residual `D₂y + v y` (second
//! differences plus reaction), boundary slopes by one-sided second-order
//! differences, and the constants from the same stencils applied to `y0`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::{GridFunction, Interval};
use crate::solver::{evolve_multiplicative, CnOptions, ReactionWindow};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Knobs for the bound checks.
#[derive(Debug, Clone, Copy)]
pub struct P1Options {
    pub t_final: f64,
    pub dt: f64,
    /// Tolerance on every inequality (discrete derivatives of simulated
    /// fields are the noisiest data in the crate).
    pub tol: f64,
}

impl Default for P1Options {
    fn default() -> Self {
        P1Options { t_final: 0.05, dt: 1e-4, tol: 1e-3 }
    }
}

/// Measured margins of the three bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct P1Report {
    /// `max y_t` over snapshots and space.
    pub max_yt: f64,
    /// `max (y0'')⁺`.
    pub bound_a: f64,
    pub min_yx0: f64,
    pub max_yx0: f64,
    /// `e · max (y0' e^{y0})`.
    pub bound_b: f64,
    pub min_yx1: f64,
    pub max_yx1: f64,
    /// `e · min (y0' e^{y0})`.
    pub bound_c: f64,
    pub tol: f64,
}

impl P1Report {
    pub fn a_ok(&self) -> bool {
        self.max_yt <= self.bound_a + self.tol
    }

    pub fn b_ok(&self) -> bool {
        self.min_yx0 >= -self.tol && self.max_yx0 <= self.bound_b + self.tol
    }

    pub fn c_ok(&self) -> bool {
        self.max_yx1 <= self.tol && self.min_yx1 >= self.bound_c - self.tol
    }

    pub fn all_ok(&self) -> bool {
        self.a_ok() && self.b_ok() && self.c_ok()
    }
}

fn derivative_constants(y0: &GridFunction) -> (f64, f64, f64) {
    let v = y0.values();
    let n = v.len();
    let h = y0.h();
    let mut d2_plus = 0.0f64;
    let mut bern_max = f64::NEG_INFINITY;
    let mut bern_min = f64::INFINITY;
    for i in 0..n {
        if i > 0 && i + 1 < n {
            d2_plus = d2_plus.max((v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h));
        }
        let d1 = if i == 0 {
            (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
        } else if i + 1 == n {
            (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * h)
        };
        let b = d1 * v[i].exp();
        bern_max = bern_max.max(b);
        bern_min = bern_min.min(b);
    }
    (d2_plus, bern_max, bern_min)
}

/// Simulates `y_t = y_xx + v(x) y` and measures the three bounds.
pub fn check_p1_bounds(
    y0: &GridFunction,
    v: &GridFunction,
    opts: &P1Options,
) -> CoreResult<P1Report> {
    if v.max_value() > 1e-12 {
        return Err(CoreError::invalid("v", "reaction coefficient must be nonpositive"));
    }
    if !y0.is_nonnegative(1e-12) || !y0.is_dirichlet(1e-12) {
        return Err(CoreError::invalid("y0", "need nonnegative Dirichlet data"));
    }
    let n = y0.n_points();
    let h = y0.h();
    let (d2_plus, bern_max, bern_min) = derivative_constants(y0);
    let e = std::f64::consts::E;

    // interior: zero endpoint values so the full domain acts as support
    let mut v_interior = v.clone();
    v_interior.values_mut()[0] = 0.0;
    let last = n - 1;
    v_interior.values_mut()[last] = 0.0;
    let window = ReactionWindow::with_profile(
        0.0,
        opts.t_final,
        v_interior.clone(),
        Interval::new(0.0, 1.0)?,
    )?;
    let cn = CnOptions { dt: opts.dt, max_snapshots: 256, monotone: true, expect_nonnegative: true };
    let traj = evolve_multiplicative(y0, &[window], opts.t_final, &cn)?;

    let mut max_yt = f64::NEG_INFINITY;
    let mut min_yx0 = f64::INFINITY;
    let mut max_yx0 = f64::NEG_INFINITY;
    let mut min_yx1 = f64::INFINITY;
    let mut max_yx1 = f64::NEG_INFINITY;
    for snap in &traj.snapshots {
        let y = snap.values();
        for i in 1..n - 1 {
            let yt = (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h) + v_interior.values()[i] * y[i];
            max_yt = max_yt.max(yt);
        }
        let yx0 = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
        let yx1 = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
        min_yx0 = min_yx0.min(yx0);
        max_yx0 = max_yx0.max(yx0);
        min_yx1 = min_yx1.min(yx1);
        max_yx1 = max_yx1.max(yx1);
    }

    Ok(P1Report {
        max_yt,
        bound_a: d2_plus,
        min_yx0,
        max_yx0,
        bound_b: e * bern_max,
        min_yx1,
        max_yx1,
        bound_c: e * bern_min,
        tol: opts.tol,
    })
}

/// Seeded suite: random smooth nonnegative states against random
/// nonpositive time-independent coefficients.
pub fn p1_suite(
    n_samples: usize,
    seed: u64,
    n_grid: usize,
    opts: &P1Options,
) -> CoreResult<Vec<P1Report>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut reports = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let y0 = crate::obstruction::sampling::random_smooth_nonneg(&mut rng, n_grid, 3);
        // random nonpositive coefficient: clipped sine polynomial
        let modes: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scale = rng.gen_range(0.0..60.0);
        let v = GridFunction::from_fn(n_grid, |x| {
            let s: f64 = modes
                .iter()
                .enumerate()
                .map(|(j, c)| c * ((j + 1) as f64 * std::f64::consts::PI * x).sin())
                .sum();
            -scale * s.max(0.0)
        });
        reports.push(check_p1_bounds(&y0, &v, opts)?);
    }
    Ok(reports)
}
