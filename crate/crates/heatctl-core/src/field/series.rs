//! Sine-series coefficients in the convention `y(x) = 2 Σ_k a_k sin(kπx)`.
//!
//! With this normalization Parseval reads `‖y‖²_{L²} = 2 Σ a_k²` and the
//! `H¹₀` seminorm `(∫ y_x²)^{1/2}` becomes `(2π² Σ k² a_k²)^{1/2}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::field::GridFunction;
use crate::numerics::trapezoid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineSeries {
    /// `coeffs[i]` is `a_{i+1}`.
    coeffs: Vec<f64>,
}

impl SineSeries {
    pub fn new(coeffs: Vec<f64>) -> CoreResult<Self> {
        if coeffs.is_empty() {
            return Err(CoreError::invalid("coeffs", "need k_max >= 1"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::invalid("coeffs", "coefficients must be finite"));
        }
        Ok(SineSeries { coeffs })
    }

    pub fn zeros(k_max: usize) -> Self {
        assert!(k_max >= 1);
        SineSeries { coeffs: vec![0.0; k_max] }
    }

    /// Single-mode series with `a_k = amplitude`.
    pub fn mode(k: usize, amplitude: f64, k_max: usize) -> Self {
        assert!((1..=k_max).contains(&k));
        let mut s = SineSeries::zeros(k_max);
        s.coeffs[k - 1] = amplitude;
        s
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient `a_k` (1-based); zero beyond the stored cutoff.
    pub fn coeff(&self, k: usize) -> f64 {
        assert!(k >= 1);
        self.coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    /// `‖y‖_{L²} = (2 Σ a_k²)^{1/2}` (exact Parseval in this convention).
    pub fn norm_l2(&self) -> f64 {
        (2.0 * self.coeffs.iter().map(|a| a * a).sum::<f64>()).sqrt()
    }

    /// `‖y‖_{H¹₀} = (∫ y_x²)^{1/2} = (2π² Σ k² a_k²)^{1/2}`.
    pub fn norm_h01(&self) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let k = (i + 1) as f64;
                k * k * a * a
            })
            .sum();
        (2.0 * PI * PI * s).sqrt()
    }

    pub fn l2_distance(&self, other: &SineSeries) -> f64 {
        self.combine(other, |a, b| a - b).norm_l2()
    }

    pub fn h01_distance(&self, other: &SineSeries) -> f64 {
        self.combine(other, |a, b| a - b).norm_h01()
    }

    pub fn add(&self, other: &SineSeries) -> SineSeries {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SineSeries) -> SineSeries {
        self.combine(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> SineSeries {
        SineSeries { coeffs: self.coeffs.iter().map(|a| c * a).collect() }
    }

    fn combine(&self, other: &SineSeries, f: impl Fn(f64, f64) -> f64) -> SineSeries {
        let k = self.k_max().max(other.k_max());
        let coeffs = (1..=k).map(|i| f(self.coeff(i), other.coeff(i))).collect();
        SineSeries { coeffs }
    }

    /// Samples `2 Σ a_k sin(kπ x_i)` on `n_points` nodes; the endpoint
    /// values are exactly zero.
    pub fn evaluate(&self, n_points: usize) -> GridFunction {
        assert!(n_points >= 3);
        let h = 1.0 / (n_points - 1) as f64;
        let mut values = vec![0.0; n_points];
        for i in 1..n_points - 1 {
            let x = i as f64 * h;
            let mut acc = 0.0;
            for (j, a) in self.coeffs.iter().enumerate() {
                acc += a * ((j + 1) as f64 * PI * x).sin();
            }
            values[i] = 2.0 * acc;
        }
        GridFunction::new(values).expect("finite by construction")
    }

    /// Value of the series at a single point.
    pub fn evaluate_at(&self, x: f64) -> f64 {
        2.0 * self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a * ((j + 1) as f64 * PI * x).sin())
            .sum::<f64>()
    }
}

/// Projects grid samples onto the first `k_max` sine modes,
/// `a_k = ∫_0^1 f(s) sin(kπs) ds`, by composite trapezoid on `f`'s grid.
///
/// Rejects `k_max >= n_points - 1`: those modes alias on the grid.
pub fn project_to_sine(f: &GridFunction, k_max: usize) -> CoreResult<SineSeries> {
    if k_max < 1 {
        return Err(CoreError::invalid("k_max", "need k_max >= 1"));
    }
    if k_max >= f.n_points() - 1 {
        return Err(CoreError::AliasingLimit { k_max, n_points: f.n_points() });
    }
    let h = f.h();
    let n = f.n_points();
    let mut coeffs = Vec::with_capacity(k_max);
    let mut integrand = vec![0.0; n];
    for k in 1..=k_max {
        let kpi = k as f64 * PI;
        for (i, v) in f.values().iter().enumerate() {
            integrand[i] = v * (kpi * i as f64 * h).sin();
        }
        coeffs.push(trapezoid(&integrand, h));
    }
    SineSeries::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn projects_first_mode() {
        // f = sin(πx): a_1 = ∫ sin² = 1/2, higher modes vanish
        let f = GridFunction::from_fn(1025, |x| (PI * x).sin());
        let s = project_to_sine(&f, 8).unwrap();
        assert_relative_eq!(s.coeff(1), 0.5, epsilon = 1e-10);
        for k in 2..=8 {
            assert!(s.coeff(k).abs() <= 1e-10, "a_{k} = {}", s.coeff(k));
        }
    }

    #[test]
    fn projects_zero() {
        let s = project_to_sine(&GridFunction::zeros(65), 8).unwrap();
        assert!(s.coeffs().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn parabola_coefficients_match_closed_form() {
        // ∫ x(1-x) sin(kπx) dx = 2(1-(-1)^k)/(kπ)³
        let f = GridFunction::from_fn(1025, |x| x * (1.0 - x));
        let s = project_to_sine(&f, 4).unwrap();
        let closed = |k: usize| {
            let kpi = k as f64 * PI;
            2.0 * (1.0 - (-1.0f64).powi(k as i32)) / (kpi * kpi * kpi)
        };
        assert_relative_eq!(s.coeff(1), closed(1), epsilon = 1e-8);
        assert_relative_eq!(s.coeff(1), 4.0 / PI.powi(3), epsilon = 1e-6);
        assert!(s.coeff(2).abs() < 1e-10, "even mode should vanish by symmetry");
        assert_relative_eq!(s.coeff(3), closed(3), epsilon = 1e-8);
    }

    #[test]
    fn rejects_aliasing() {
        let f = GridFunction::zeros(9);
        assert!(matches!(project_to_sine(&f, 8), Err(CoreError::AliasingLimit { .. })));
        assert!(project_to_sine(&f, 7).is_ok());
    }

    #[test]
    fn evaluate_single_mode() {
        let s = SineSeries::mode(1, 0.5, 4);
        let g = s.evaluate(257);
        for i in 0..g.n_points() {
            assert_relative_eq!(g.values()[i], (PI * g.x(i)).sin(), epsilon = 1e-13);
        }
        assert_eq!(g.values()[0], 0.0);
        assert_eq!(g.values()[g.n_points() - 1], 0.0);
        assert_eq!(SineSeries::zeros(4).evaluate(17).sup_norm(), 0.0);
    }

    #[test]
    fn norms_match_closed_forms() {
        let s = SineSeries::mode(1, 0.5, 2);
        assert_relative_eq!(s.norm_l2(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.norm_h01(), PI / 2.0f64.sqrt(), epsilon = 1e-15);

        let s2 = SineSeries::new(vec![0.5, 0.5]).unwrap();
        assert_relative_eq!(s2.norm_l2(), 1.0, epsilon = 1e-15);

        // {a_1 = 0.5, a_2 = 0.25}: H¹₀ norm = sqrt(2π²(0.25 + 4·0.0625)) = π
        let s3 = SineSeries::new(vec![0.5, 0.25]).unwrap();
        assert_relative_eq!(s3.norm_h01(), PI, epsilon = 1e-15);
        assert_eq!(SineSeries::zeros(3).norm_h01(), 0.0);
    }

    #[test]
    fn round_trip_band_limited() {
        // project ∘ evaluate is the identity up to 1e-10 for k_max ≤ (n-1)/2
        let s = SineSeries::new(vec![0.3, -0.2, 0.11, 0.0, 0.07]).unwrap();
        let g = s.evaluate(257);
        let back = project_to_sine(&g, 5).unwrap();
        for k in 1..=5 {
            assert_relative_eq!(back.coeff(k), s.coeff(k), epsilon = 1e-10);
        }
    }
}
