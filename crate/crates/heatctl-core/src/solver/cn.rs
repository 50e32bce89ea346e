//! Crank-Nicolson stepping for the multiplicative (bilinear) system
//! `y_t = y_xx + v(x,t) y χ_ω(x)` on the uniform grid.
//!
//! The reaction term is treated implicitly together with the Laplacian:
//! `(I - dt/2 (D₂ + V)) y⁺ = (I + dt/2 (D₂ + V)) y`, one tridiagonal solve
//! per step. For `v ≤ 0` the implicit matrix is an M-matrix; with
//! `|v| dt / 2` kept below one the scheme does not flip signs, and with
//! `dt ≤ h²` it is monotone (used by the strict-positivity checks).

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::{GridFunction, Interval};
use crate::numerics::thomas_solve;
use crate::solver::max_principle::NEGATIVITY_TOL;
use crate::solver::trajectory::{snapshot_times, Diagnostics, Trajectory};

/// Reaction coefficient on a window: a uniform value `-m` or a grid shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ReactionCoefficient {
    Uniform(f64),
    Profile(GridFunction),
}

impl ReactionCoefficient {
    fn sup(&self) -> f64 {
        match self {
            ReactionCoefficient::Uniform(v) => v.abs(),
            ReactionCoefficient::Profile(g) => g.sup_norm(),
        }
    }

    fn max_value(&self) -> f64 {
        match self {
            ReactionCoefficient::Uniform(v) => *v,
            ReactionCoefficient::Profile(g) => g.max_value(),
        }
    }

    /// Samples the coefficient restricted to `support` on an `n`-point grid.
    fn sample(&self, n: usize, support: &Interval) -> CoreResult<Vec<f64>> {
        let h = 1.0 / (n - 1) as f64;
        let mut out = vec![0.0; n];
        match self {
            ReactionCoefficient::Uniform(v) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let x = i as f64 * h;
                    if support.contains(x) {
                        *o = *v;
                    }
                }
            }
            ReactionCoefficient::Profile(g) => {
                let resampled = if g.n_points() == n { g.clone() } else { g.resample(n) };
                let outside = resampled.sup_outside(support);
                if outside > 1e-9 {
                    return Err(CoreError::SupportViolation {
                        mass: outside,
                        lo: support.lo(),
                        hi: support.hi(),
                    });
                }
                for (i, o) in out.iter_mut().enumerate() {
                    let x = i as f64 * h;
                    if support.contains(x) {
                        *o = resampled.values()[i];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// A reaction window: the coefficient acts on `support` during
/// `[t_start, t_end]` and is zero elsewhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReactionWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub coefficient: ReactionCoefficient,
    pub support: Interval,
}

impl ReactionWindow {
    pub fn uniform(t_start: f64, t_end: f64, value: f64, support: Interval) -> CoreResult<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(CoreError::invalid("t_start", "need t_start < t_end"));
        }
        Ok(ReactionWindow { t_start, t_end, coefficient: ReactionCoefficient::Uniform(value), support })
    }

    pub fn with_profile(
        t_start: f64,
        t_end: f64,
        profile: GridFunction,
        support: Interval,
    ) -> CoreResult<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(CoreError::invalid("t_start", "need t_start < t_end"));
        }
        Ok(ReactionWindow { t_start, t_end, coefficient: ReactionCoefficient::Profile(profile), support })
    }
}

/// Knobs for the grid solver.
#[derive(Debug, Clone, Copy)]
pub struct CnOptions {
    pub dt: f64,
    pub max_snapshots: usize,
    /// Force `dt ≤ h²` (monotone scheme; positivity-exact for v ≤ 0).
    pub monotone: bool,
    /// Expect a nonnegative run (y0 ≥ 0, v arbitrary sign allowed by the
    /// weak maximum principle when sources are absent); undershoots beyond
    /// `NEGATIVITY_TOL` set the trajectory flag.
    pub expect_nonnegative: bool,
}

impl Default for CnOptions {
    fn default() -> Self {
        CnOptions { dt: 1e-4, max_snapshots: 512, monotone: false, expect_nonnegative: true }
    }
}

/// Low-level Crank-Nicolson state: owns the current grid values and the
/// tridiagonal scratch space. Reaction values are passed per step.
#[derive(Debug, Clone)]
pub struct CnStepper {
    h: f64,
    t: f64,
    y: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl CnStepper {
    pub fn new(y0: &GridFunction, t0: f64) -> Self {
        let n = y0.n_points();
        CnStepper {
            h: y0.h(),
            t: t0,
            y: y0.values().to_vec(),
            lower: vec![0.0; n - 2],
            diag: vec![0.0; n - 2],
            upper: vec![0.0; n - 2],
            rhs: vec![0.0; n - 2],
            scratch: vec![0.0; n - 2],
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Pins the clock (used to absorb rounding drift at window edges).
    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn state(&self) -> GridFunction {
        GridFunction::new(self.y.clone()).expect("stepper state stays finite")
    }

    pub fn n_points(&self) -> usize {
        self.y.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// One CN step of size `dt` with reaction values `v` (full-grid slice;
    /// pass `None` for pure diffusion). Dirichlet endpoints stay zero.
    pub fn step(&mut self, dt: f64, v: Option<&[f64]>) {
        let n = self.y.len();
        let m = n - 2;
        let r = dt / (2.0 * self.h * self.h);
        for i in 0..m {
            let vi = v.map_or(0.0, |v| v[i + 1]);
            self.diag[i] = 1.0 + 2.0 * r - 0.5 * dt * vi;
            self.lower[i] = -r;
            self.upper[i] = -r;
            let (yl, yc, yr) = (self.y[i], self.y[i + 1], self.y[i + 2]);
            self.rhs[i] = yc * (1.0 - 2.0 * r + 0.5 * dt * vi) + r * (yl + yr);
        }
        thomas_solve(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch);
        self.y[0] = 0.0;
        self.y[n - 1] = 0.0;
        self.y[1..n - 1].copy_from_slice(&self.rhs);
        self.t += dt;
    }

    /// Marches to `t_target` in uniform substeps no longer than `dt_cap`,
    /// hitting the target exactly; `observe` runs after every step.
    pub fn march(
        &mut self,
        t_target: f64,
        dt_cap: f64,
        v: Option<&[f64]>,
        mut observe: impl FnMut(&CnStepper),
    ) {
        let span = t_target - self.t;
        if span <= 0.0 {
            return;
        }
        let steps = (span / dt_cap).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for s in 0..steps {
            self.step(dt, v);
            if s + 1 == steps {
                self.t = t_target; // avoid rounding drift at window edges
            }
            observe(self);
        }
    }
}

fn validate_reaction_windows(windows: &[ReactionWindow], t_final: f64, dt: f64) -> CoreResult<()> {
    let mut prev_end = 0.0f64;
    for w in windows {
        if w.t_start < -1e-12 || w.t_end > t_final + 1e-12 {
            return Err(CoreError::invalid(
                "windows",
                format!("window [{}, {}] leaves [0, {t_final}]", w.t_start, w.t_end),
            ));
        }
        if w.t_start < prev_end - 1e-12 {
            return Err(CoreError::WindowOverlap { t: w.t_start });
        }
        if dt >= w.t_end - w.t_start {
            return Err(CoreError::invalid(
                "dt",
                format!("dt = {dt} does not resolve window [{}, {}]", w.t_start, w.t_end),
            ));
        }
        prev_end = w.t_end;
    }
    Ok(())
}

/// Evolves the multiplicative system with Crank-Nicolson and records
/// snapshots and maximum-principle diagnostics.
pub fn evolve_multiplicative(
    y0: &GridFunction,
    windows: &[ReactionWindow],
    t_final: f64,
    opts: &CnOptions,
) -> CoreResult<Trajectory> {
    if !(opts.dt > 0.0) {
        return Err(CoreError::invalid("dt", "need dt > 0"));
    }
    if !(t_final > 0.0) {
        return Err(CoreError::invalid("t_final", "need t_final > 0"));
    }
    if !y0.is_dirichlet(1e-12) {
        return Err(CoreError::invalid("y0", "initial state must vanish at both endpoints"));
    }
    let mut sorted: Vec<ReactionWindow> = windows.to_vec();
    sorted.sort_by(|a, b| a.t_start.partial_cmp(&b.t_start).expect("finite times"));
    validate_reaction_windows(&sorted, t_final, opts.dt)?;

    let n = y0.n_points();
    let h = y0.h();
    let dt_base = if opts.monotone { opts.dt.min(h * h) } else { opts.dt };

    let mut markers = Vec::new();
    for w in &sorted {
        markers.push(w.t_start);
        markers.push(w.t_end);
    }
    let plan = snapshot_times(t_final, &markers, opts.max_snapshots);

    let mut stepper = CnStepper::new(y0, 0.0);
    let mut diagnostics = Diagnostics::empty();
    diagnostics.absorb(y0.values());
    let mut times = vec![0.0];
    let mut snapshots = vec![y0.clone()];
    diagnostics.snapshot_l2.push(y0.norm_l2());
    let mut next_snap = 1usize;

    // boundary values are zero; the MP-ii ceiling is the positive part of y0
    let reaction_nonpositive = sorted.iter().all(|w| w.coefficient.max_value() <= 1e-12);
    if reaction_nonpositive {
        diagnostics.sup_bound_k = Some(y0.max_value().max(0.0));
    }

    // edges of homogeneous/reaction spans, in order
    let mut edges = vec![0.0];
    for w in &sorted {
        edges.push(w.t_start);
        edges.push(w.t_end);
    }
    edges.push(t_final);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);

    for span in edges.windows(2) {
        let (t0, t1) = (span[0], span[1]);
        if t1 - t0 <= 1e-15 {
            continue;
        }
        let active = sorted
            .iter()
            .find(|w| w.t_start <= t0 + 1e-15 && t1 <= w.t_end + 1e-15);
        let v = match active {
            Some(w) => Some(w.coefficient.sample(n, &w.support)?),
            None => None,
        };
        // keep |v| dt / 2 well below 1 so the per-step amplification of the
        // reaction stays positive
        let dt_cap = match &v {
            Some(v) => {
                let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if sup > 0.0 {
                    dt_base.min(0.9 / sup)
                } else {
                    dt_base
                }
            }
            None => dt_base,
        };
        stepper.t = t0;
        stepper.march(t1, dt_cap, v.as_deref(), |s| {
            diagnostics.absorb(s.values());
            if next_snap < plan.len() && s.time() >= plan[next_snap] - 1e-15 {
                let g = s.state();
                diagnostics.snapshot_l2.push(g.norm_l2());
                times.push(s.time());
                snapshots.push(g);
                while next_snap < plan.len() && plan[next_snap] <= s.time() + 1e-15 {
                    next_snap += 1;
                }
            }
        });
    }

    if (times.last().copied().unwrap_or(0.0) - t_final).abs() > 1e-15 {
        let g = stepper.state();
        diagnostics.snapshot_l2.push(g.norm_l2());
        times.push(t_final);
        snapshots.push(g);
    }
    let final_grid = stepper.state();
    if opts.expect_nonnegative && diagnostics.min_value < -NEGATIVITY_TOL {
        diagnostics.negativity_flagged = true;
    }
    Ok(Trajectory { times, snapshots, final_grid, final_series: None, diagnostics })
}
