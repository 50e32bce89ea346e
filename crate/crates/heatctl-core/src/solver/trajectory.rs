//! Trajectory container and snapshot-time planning.

use serde::{Deserialize, Serialize};

use crate::field::{GridFunction, SineSeries};

/// Scalar diagnostics gathered while stepping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Minimum value seen over all computed states (every step for the
    /// grid solver, every snapshot for the spectral one).
    pub min_value: f64,
    /// Maximum value seen over all computed states.
    pub max_value: f64,
    /// `‖y(·,t)‖_{L²}` per stored snapshot.
    pub snapshot_l2: Vec<f64>,
    /// Weak-maximum-principle ceiling `K` (positive parts of the initial
    /// and boundary data); set by the grid solver when applicable.
    pub sup_bound_k: Option<f64>,
    /// Set when a nonnegativity expectation was violated beyond tolerance
    /// (the run is still returned; callers decide).
    pub negativity_flagged: bool,
}

impl Diagnostics {
    pub(crate) fn empty() -> Self {
        Diagnostics {
            min_value: f64::INFINITY,
            max_value: f64::NEG_INFINITY,
            snapshot_l2: Vec::new(),
            sup_bound_k: None,
            negativity_flagged: false,
        }
    }

    pub(crate) fn absorb(&mut self, values: &[f64]) {
        for &v in values {
            self.min_value = self.min_value.min(v);
            self.max_value = self.max_value.max(v);
        }
    }
}

/// A computed evolution: snapshot times, grid states, and the final state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<GridFunction>,
    /// Final state on the evaluation grid, exact at the terminal time.
    pub final_grid: GridFunction,
    /// Exact mode coefficients of the final state (spectral runs only).
    pub final_series: Option<SineSeries>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn t_final(&self) -> f64 {
        *self.times.last().expect("trajectory has at least two times")
    }

    /// Index of the stored snapshot closest to `t`.
    pub fn snapshot_at(&self, t: f64) -> usize {
        self.times
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (**a - t).abs().partial_cmp(&(**b - t).abs()).expect("finite times")
            })
            .map(|(i, _)| i)
            .expect("nonempty")
    }
}

/// Plans snapshot times on `[0, t_final]`: a uniform coarse grid plus
/// geometric refinement near each marker (window boundaries), capped at
/// `cap` entries. `0` and `t_final` are always present.
pub fn snapshot_times(t_final: f64, markers: &[f64], cap: usize) -> Vec<f64> {
    assert!(t_final > 0.0 && cap >= 2);
    let mut times = Vec::new();
    let coarse = (cap / 4).clamp(2, 65);
    for i in 0..=coarse {
        times.push(t_final * i as f64 / coarse as f64);
    }
    for &m in markers {
        if !(0.0..=t_final).contains(&m) {
            continue;
        }
        times.push(m);
        let span = t_final.min(0.05 * t_final);
        for i in 1..=6 {
            let d = span * 0.5f64.powi(i);
            if m + d < t_final {
                times.push(m + d);
            }
            if m - d > 0.0 {
                times.push(m - d);
            }
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * t_final.max(1.0));
    // thin the middle if over budget; endpoints stay
    while times.len() > cap {
        let mut thinned = Vec::with_capacity(times.len() / 2 + 2);
        thinned.push(times[0]);
        for (i, &t) in times.iter().enumerate().skip(1) {
            if i % 2 == 0 && i + 1 != times.len() {
                continue;
            }
            thinned.push(t);
        }
        if *thinned.last().unwrap() != *times.last().unwrap() {
            thinned.push(*times.last().unwrap());
        }
        times = thinned;
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_plan_covers_endpoints_and_markers() {
        let times = snapshot_times(1.0, &[0.98, 0.99], 512);
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 1.0);
        assert!(times.iter().any(|&t| (t - 0.98).abs() < 1e-12));
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!(times.len() <= 512);
    }

    #[test]
    fn snapshot_plan_respects_cap() {
        let markers: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
        let times = snapshot_times(1.0, &markers, 64);
        assert!(times.len() <= 64);
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 1.0);
    }
}
