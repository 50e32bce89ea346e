//! Exact spectral evolution of the additive system.
//!
//! For a source that is constant in time on a window, mode `k` obeys the
//! closed-form Duhamel step
//!
//! `a_k(t) = a_k(t0) e^{-π²k²(t-t0)} + c_k (1 - e^{-π²k²(t-t0)}) / (π²k²)`,
//!
//! so the march is exact to rounding; between windows the modes decay
//! freely. All the pulse constructions funnel through this path.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::{project_to_sine, GridFunction, Interval, SineSeries};
use crate::solver::trajectory::{snapshot_times, Diagnostics, Trajectory};

/// Decay rate of mode `k`.
pub(crate) fn lambda(k: usize) -> f64 {
    let kpi = k as f64 * PI;
    kpi * kpi
}

/// A time window carrying a fixed spatial source shape.
///
/// The effective source is `amplitude · profile(x)` for `t` in
/// `[t_start, t_end]`; the profile must vanish outside `support`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub amplitude: f64,
    pub profile: GridFunction,
    pub support: Interval,
}

impl SourceWindow {
    pub fn new(
        t_start: f64,
        t_end: f64,
        amplitude: f64,
        profile: GridFunction,
        support: Interval,
    ) -> CoreResult<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(CoreError::invalid("t_start", "need t_start < t_end"));
        }
        if !amplitude.is_finite() {
            return Err(CoreError::invalid("amplitude", "must be finite"));
        }
        let outside = profile.sup_outside(&support);
        if outside > 1e-12 {
            return Err(CoreError::SupportViolation {
                mass: outside,
                lo: support.lo(),
                hi: support.hi(),
            });
        }
        Ok(SourceWindow { t_start, t_end, amplitude, profile, support })
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Discretization knobs for the spectral path.
#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    /// Mode cutoff N.
    pub k_max: usize,
    /// Evaluation-grid size for snapshots and diagnostics.
    pub n_eval: usize,
    /// Snapshot budget per run.
    pub max_snapshots: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { k_max: 256, n_eval: 1025, max_snapshots: 512 }
    }
}

/// Free decay: `a_k ↦ a_k e^{-π²k²t}`, exact.
pub fn evolve_free(y0: &SineSeries, t: f64) -> CoreResult<SineSeries> {
    if !(t >= 0.0) {
        return Err(CoreError::invalid("t", format!("need t >= 0, got {t}")));
    }
    let coeffs = y0
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| a * (-lambda(i + 1) * t).exp())
        .collect();
    SineSeries::new(coeffs)
}

/// One exact-marching segment of an additive run: constant source
/// coefficients on `[t_start, t_end]`, with the mode state at `t_start`.
#[derive(Debug, Clone)]
pub struct ModeSegment {
    pub t_start: f64,
    pub t_end: f64,
    /// `a_k(t_start)`.
    pub start_coeffs: Vec<f64>,
    /// Source coefficients `c_k` (zero between windows).
    pub source_coeffs: Vec<f64>,
}

impl ModeSegment {
    /// `a_k(t)` for `t` inside the segment.
    pub fn coeff_at(&self, k: usize, t: f64) -> f64 {
        let dt = (t - self.t_start).max(0.0);
        let lam = lambda(k);
        let decay = (-lam * dt).exp();
        self.start_coeffs[k - 1] * decay + self.source_coeffs[k - 1] * (1.0 - decay) / lam
    }

    pub fn state_at(&self, t: f64) -> SineSeries {
        let coeffs = (1..=self.start_coeffs.len()).map(|k| self.coeff_at(k, t)).collect();
        SineSeries::new(coeffs).expect("finite by construction")
    }
}

fn validate_windows(windows: &[SourceWindow], t_final: f64) -> CoreResult<()> {
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
        prev_end = w.t_end;
    }
    Ok(())
}

/// Builds the exact mode-space segment chain for an additive run; windows
/// must be time-ordered and non-overlapping inside `[0, t_final]`.
pub fn additive_segments(
    y0: &SineSeries,
    windows: &[SourceWindow],
    t_final: f64,
    k_max: usize,
) -> CoreResult<Vec<ModeSegment>> {
    if !(t_final > 0.0) {
        return Err(CoreError::invalid("t_final", "need t_final > 0"));
    }
    let mut sorted: Vec<&SourceWindow> = windows.iter().collect();
    sorted.sort_by(|a, b| a.t_start.partial_cmp(&b.t_start).expect("finite times"));
    let owned: Vec<SourceWindow> = sorted.iter().map(|w| (*w).clone()).collect();
    validate_windows(&owned, t_final)?;

    let mut state: Vec<f64> = (1..=k_max).map(|k| y0.coeff(k)).collect();
    let zero = vec![0.0; k_max];
    let mut segments = Vec::new();
    let mut t = 0.0f64;
    let mut push_segment = |t0: f64, t1: f64, src: &[f64], state: &mut Vec<f64>| {
        if t1 - t0 <= 0.0 {
            return;
        }
        let seg = ModeSegment {
            t_start: t0,
            t_end: t1,
            start_coeffs: state.clone(),
            source_coeffs: src.to_vec(),
        };
        for k in 1..=k_max {
            state[k - 1] = seg.coeff_at(k, t1);
        }
        segments.push(seg);
    };
    for w in &owned {
        push_segment(t, w.t_start, &zero, &mut state);
        let c = project_to_sine(&w.profile, k_max)?;
        let src: Vec<f64> = c.coeffs().iter().map(|a| w.amplitude * a).collect();
        push_segment(w.t_start.max(t), w.t_end, &src, &mut state);
        t = w.t_end.max(t);
    }
    push_segment(t, t_final, &zero, &mut state);
    if segments.is_empty() {
        // t_final coincides with the last window end and no gap remains
        segments.push(ModeSegment {
            t_start: 0.0,
            t_end: t_final,
            start_coeffs: state.clone(),
            source_coeffs: zero,
        });
    }
    Ok(segments)
}

pub(crate) fn state_on_segments(segments: &[ModeSegment], t: f64) -> SineSeries {
    let seg = segments
        .iter()
        .find(|s| t <= s.t_end + 1e-15)
        .unwrap_or_else(|| segments.last().expect("nonempty"));
    seg.state_at(t.min(seg.t_end))
}

/// Evolves the additive system exactly and records snapshots.
pub fn evolve_additive(
    y0: &SineSeries,
    windows: &[SourceWindow],
    t_final: f64,
    opts: &SpectralOptions,
) -> CoreResult<Trajectory> {
    let segments = additive_segments(y0, windows, t_final, opts.k_max)?;
    let mut markers = Vec::new();
    for w in windows {
        markers.push(w.t_start);
        markers.push(w.t_end);
    }
    let times = snapshot_times(t_final, &markers, opts.max_snapshots);
    let mut diagnostics = Diagnostics::empty();
    let mut snapshots = Vec::with_capacity(times.len());
    for &t in &times {
        let grid = state_on_segments(&segments, t).evaluate(opts.n_eval);
        diagnostics.absorb(grid.values());
        diagnostics.snapshot_l2.push(grid.norm_l2());
        snapshots.push(grid);
    }
    let final_series = state_on_segments(&segments, t_final);
    let final_grid = final_series.evaluate(opts.n_eval);
    Ok(Trajectory {
        times,
        snapshots,
        final_grid,
        final_series: Some(final_series),
        diagnostics,
    })
}
