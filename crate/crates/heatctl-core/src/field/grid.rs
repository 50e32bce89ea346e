//! Grid samples on the uniform partition of `[0, 1]` and subintervals.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::numerics::trapezoid;

/// An open subinterval `(lo, hi)` of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> CoreResult<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > 1.0 || lo >= hi {
            return Err(CoreError::invalid(
                "interval",
                format!("need 0 <= lo < hi <= 1, got ({lo}, {hi})"),
            ));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// True when the closure of `self` contains the closure of `other`.
    pub fn covers(&self, other: &Interval) -> bool {
        self.lo <= other.lo + 1e-12 && other.hi <= self.hi + 1e-12
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

/// `∫_lo^hi f²` for grid samples with spacing `h`; partial cells at the
/// interval ends use linear interpolation of `f`.
pub(crate) fn window_l2_sq(values: &[f64], h: f64, lo: f64, hi: f64) -> f64 {
    let sq = |i: usize| values[i] * values[i];
    let interp = |x: f64| -> f64 {
        let s = x / h;
        let i = (s.floor() as usize).min(values.len() - 2);
        let w = s - i as f64;
        let v = values[i] * (1.0 - w) + values[i + 1] * w;
        v * v
    };
    let i_lo = (lo / h).ceil() as usize;
    let i_hi = (hi / h).floor() as usize;
    if i_lo > i_hi {
        // interval inside one cell
        let mid = 0.5 * (lo + hi);
        return interp(mid) * (hi - lo);
    }
    let mut acc = 0.0;
    for i in i_lo..i_hi {
        acc += 0.5 * (sq(i) + sq(i + 1)) * h;
    }
    // partial cells at both ends
    let left = i_lo as f64 * h - lo;
    if left > 1e-15 {
        acc += 0.5 * (interp(lo) + sq(i_lo)) * left;
    }
    let right = hi - i_hi as f64 * h;
    if right > 1e-15 {
        acc += 0.5 * (sq(i_hi) + interp(hi)) * right;
    }
    acc
}

/// Samples of a function of `x` on the uniform grid `x_i = i/(n-1)`.
///
/// Dirichlet states carry exact zeros at both endpoints; that property is
/// checked where it is required, not on construction, because source
/// profiles and reaction coefficients use the same container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> CoreResult<Self> {
        if values.len() < 3 {
            return Err(CoreError::invalid("values", "grid needs at least 3 points"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::invalid("values", "grid values must be finite"));
        }
        Ok(GridFunction { values })
    }

    pub fn zeros(n_points: usize) -> Self {
        assert!(n_points >= 3);
        GridFunction { values: vec![0.0; n_points] }
    }

    /// Samples `f` at the grid nodes. No endpoint fixing is applied.
    pub fn from_fn(n_points: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(n_points >= 3);
        let h = 1.0 / (n_points - 1) as f64;
        GridFunction { values: (0..n_points).map(|i| f(i as f64 * h)).collect() }
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.min_value() >= -tol
    }

    /// Zero Dirichlet trace at both endpoints, up to `tol`.
    pub fn is_dirichlet(&self, tol: f64) -> bool {
        self.values[0].abs() <= tol && self.values[self.values.len() - 1].abs() <= tol
    }

    /// `(∫_0^1 f²)^{1/2}` by composite trapezoid.
    pub fn norm_l2(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        trapezoid(&sq, self.h()).max(0.0).sqrt()
    }

    /// `∫_0^1 f g` by composite trapezoid.
    pub fn inner_l2(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.n_points(), other.n_points(), "grid size mismatch");
        let prod: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        trapezoid(&prod, self.h())
    }

    pub fn l2_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.n_points(), other.n_points(), "grid size mismatch");
        let sq: Vec<f64> =
            self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).collect();
        trapezoid(&sq, self.h()).max(0.0).sqrt()
    }

    /// `(∫_lo^hi f²)^{1/2}`; interval endpoints that fall between grid nodes
    /// are handled by linear interpolation of the integrand.
    pub fn norm_l2_on(&self, iv: &Interval) -> f64 {
        window_l2_sq(&self.values, self.h(), iv.lo(), iv.hi()).max(0.0).sqrt()
    }

    /// Largest |f| over nodes strictly outside the closed interval.
    pub fn sup_outside(&self, iv: &Interval) -> f64 {
        let h = self.h();
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let x = *i as f64 * h;
                x < iv.lo() - 1e-12 || x > iv.hi() + 1e-12
            })
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction { values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        assert_eq!(self.n_points(), other.n_points(), "grid size mismatch");
        GridFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        assert_eq!(self.n_points(), other.n_points(), "grid size mismatch");
        GridFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    /// Resamples onto a grid of `n_points` by linear interpolation.
    pub fn resample(&self, n_points: usize) -> GridFunction {
        if n_points == self.n_points() {
            return self.clone();
        }
        let h = self.h();
        GridFunction::from_fn(n_points, |x| {
            let s = x / h;
            let i = (s.floor() as usize).min(self.values.len() - 2);
            let w = s - i as f64;
            self.values[i] * (1.0 - w) + self.values[i + 1] * w
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridFunction::new(vec![0.0, 1.0]).is_err());
        assert!(GridFunction::new(vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(Interval::new(0.5, 0.5).is_err());
        assert!(Interval::new(-0.1, 0.5).is_err());
    }

    #[test]
    fn l2_of_first_mode() {
        // ∫ sin² = 1/2
        let f = GridFunction::from_fn(1025, |x| (PI * x).sin());
        assert_relative_eq!(f.norm_l2(), 0.5f64.sqrt(), epsilon = 1e-7);
        assert_relative_eq!(GridFunction::zeros(11).norm_l2(), 0.0);
    }

    #[test]
    fn partial_interval_norm() {
        let f = GridFunction::from_fn(1025, |_| 1.0);
        let iv = Interval::new(0.6, 0.9).unwrap();
        // endpoints 0.6, 0.9 are not grid nodes at n = 1025
        assert_relative_eq!(f.norm_l2_on(&iv), 0.3f64.sqrt(), epsilon = 1e-12);
    }
}
