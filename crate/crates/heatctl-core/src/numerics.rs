//! Small numerical kernels: stable exponential integrals, composite
//! trapezoid quadrature, exact integrals of sine products, and the
//! tridiagonal (Thomas) solve used by the Crank-Nicolson stepper.

/// `∫_0^d e^{a s} ds`, stable for `a → 0` and large negative `a d`.
pub fn exp_integral(a: f64, d: f64) -> f64 {
    if a == 0.0 {
        d
    } else {
        (a * d).exp_m1() / a
    }
}

/// Composite trapezoid of samples `f` on a uniform grid with spacing `h`.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * (f[0] + f[n - 1]);
    for &v in &f[1..n - 1] {
        acc += v;
    }
    acc * h
}

/// Cubic smoothstep `3s² - 2s³`, clamped to `[0, 1]`.
pub fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// `∫_{x0}^{x1} cos(a x + q) dx`, exact.
fn cos_integral(a: f64, q: f64, x0: f64, x1: f64) -> f64 {
    if a == 0.0 {
        (x1 - x0) * q.cos()
    } else {
        ((a * x1 + q).sin() - (a * x0 + q).sin()) / a
    }
}

/// `∫_{x0}^{x1} sin(p x + q) sin(k π x) dx`, exact via product-to-sum.
///
/// Handles the resonant cases `p = ±kπ` through the `a = 0` branch of the
/// cosine integral, so callers never special-case them.
pub fn sine_product_integral(p: f64, q: f64, k: usize, x0: f64, x1: f64) -> f64 {
    let kp = k as f64 * std::f64::consts::PI;
    0.5 * (cos_integral(p - kp, q, x0, x1) - cos_integral(p + kp, q, x0, x1))
}

/// Solves a tridiagonal system in place with the Thomas algorithm.
///
/// `lower`, `diag`, `upper` hold the three bands (`lower[0]` and
/// `upper[n-1]` are ignored); `rhs` is overwritten with the solution.
/// `scratch` must have the same length and is clobbered.
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n && scratch.len() == n);
    if n == 0 {
        return;
    }
    scratch[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}
