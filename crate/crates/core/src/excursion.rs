//! Indicator variogram of the excursion set `{Z ≥ λ}` of a standard Gaussian
//! field, as a function of the correlation `ρ` between the two points.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::special::{integrate, normal_cdf, normal_pdf, normal_sf};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_HERMITE_TERMS: usize = 1_000_000;
/// Cramér's bound `|He_n(x)| / √n! ≤ K e^{x²/4}`.
const CRAMER_CONSTANT: f64 = 1.086435;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcursionMethod {
    /// Adaptive Gauss-Legendre over the angle `θ = arccos u`.
    Quadrature,
    /// Hermite expansion in powers of `ρ`, truncated adaptively or at a fixed
    /// number of terms.
    Hermite { n_terms: Option<usize> },
    /// Adaptive Gauss-Legendre after the tangent substitution.
    TanIntegral,
}

impl ExcursionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ExcursionMethod::Quadrature => "quadrature",
            ExcursionMethod::Hermite { .. } => "hermite",
            ExcursionMethod::TanIntegral => "tan_integral",
        }
    }
}

/// Physicists' Hermite polynomial `H_k(x)` by the three-term recurrence.
pub fn hermite_poly(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `g_λ(ρ) = P(Z(x) ≥ λ) - P(Z(x) ≥ λ, Z(y) ≥ λ)`.
pub fn g_lambda(rho: f64, lambda: f64, method: ExcursionMethod, tol: f64) -> Result<f64> {
    if !(rho.abs() <= 1.0 + 1e-12) {
        return input(format!("correlation {rho} outside [-1, 1]"));
    }
    if !lambda.is_finite() {
        return input(format!("threshold must be finite, got {lambda}"));
    }
    if !(tol > 0.0) {
        return input(format!("tolerance must be positive, got {tol}"));
    }
    let rho = rho.clamp(-1.0, 1.0);
    if rho == 1.0 {
        return Ok(0.0);
    }
    if lambda == 0.0 && !matches!(method, ExcursionMethod::Hermite { .. }) {
        return Ok(rho.acos() / (2.0 * PI));
    }
    let l2 = lambda * lambda;
    match method {
        ExcursionMethod::Quadrature => {
            let f = |theta: f64| {
                let c = (theta / 2.0).cos();
                (-l2 / (2.0 * c * c)).exp()
            };
            Ok(integrate(&f, 0.0, rho.acos(), tol) / (2.0 * PI))
        }
        ExcursionMethod::TanIntegral => {
            let upper = ((1.0 - rho) / (1.0 + rho)).sqrt().atan();
            let f = |v: f64| {
                let t = v.tan();
                (-l2 * t * t / 2.0).exp()
            };
            Ok((-l2 / 2.0).exp() / PI * integrate(&f, 0.0, upper, tol))
        }
        ExcursionMethod::Hermite { n_terms } => hermite_series(rho, lambda, n_terms, tol),
    }
}

/// `g = p(1-p) - φ(λ)² Σ_{k≥1} ρ^k h_{k-1}(λ)² / k` with `h_n = He_n / √n!`.
fn hermite_series(rho: f64, lambda: f64, n_terms: Option<usize>, tol: f64) -> Result<f64> {
    let p = normal_sf(lambda);
    let base = p * (1.0 - p);
    if rho == -1.0 {
        // Z(y) = -Z(x): both exceed λ only when λ ≤ 0.
        return Ok(p - (normal_cdf(-lambda) - normal_cdf(lambda)).max(0.0));
    }
    let phi2 = normal_pdf(lambda).powi(2);
    let bound_coef =
        CRAMER_CONSTANT * CRAMER_CONSTANT / (2.0 * PI) * (-lambda * lambda / 2.0).exp() / (1.0 - rho.abs());
    let cap = n_terms.unwrap_or(MAX_HERMITE_TERMS);
    let (mut h_prev, mut h) = (0.0, 1.0);
    let mut rho_k = 1.0;
    let mut sum = 0.0;
    for k in 1..=cap {
        rho_k *= rho;
        sum += rho_k * h * h / k as f64;
        // advance h_{k-1} -> h_k
        let n = (k - 1) as f64;
        let next = (lambda * h - n.sqrt() * h_prev) / (n + 1.0).sqrt();
        h_prev = h;
        h = next;
        if n_terms.is_none() && bound_coef * (rho_k * rho).abs() / (k as f64 + 1.0) <= tol {
            return Ok((base - phi2 * sum).clamp(0.0, 0.5));
        }
    }
    if n_terms.is_some() {
        return Ok((base - phi2 * sum).clamp(0.0, 0.5));
    }
    Err(Error::Numerical(format!(
        "Hermite series for rho = {rho}, lambda = {lambda} did not converge in {MAX_HERMITE_TERMS} terms; use quadrature"
    )))
}

/// `∫ g_λ dλ` over `|λ| ≤ 8`, which equals the madogram `√((1-ρ)/π)`.
pub fn madogram_from_excursions(rho: f64, tol: f64) -> Result<f64> {
    if !(rho.abs() <= 1.0 + 1e-12) {
        return input(format!("correlation {rho} outside [-1, 1]"));
    }
    let f = |l: f64| g_lambda(rho, l, ExcursionMethod::Quadrature, tol * 1e-2).unwrap_or(f64::NAN);
    // g_λ is even in λ.
    Ok(2.0 * integrate(&f, 0.0, 8.0, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSpec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    const ALL: [ExcursionMethod; 3] =
        [ExcursionMethod::Quadrature, ExcursionMethod::Hermite { n_terms: None }, ExcursionMethod::TanIntegral];

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_poly(0, 3.7), 1.0);
        assert_eq!(hermite_poly(1, 2.0), 4.0);
        assert_eq!(hermite_poly(2, 1.0), 2.0);
        assert_eq!(hermite_poly(3, 1.5), 8.0 * 3.375 - 12.0 * 1.5);
    }

    #[test]
    fn closed_cases() {
        for m in ALL {
            assert!((g_lambda(0.5, 0.0, m, 1e-12).unwrap() - 1.0 / 6.0).abs() < 1e-10, "{m:?}");
            assert_eq!(g_lambda(1.0, 1.3, m, 1e-12).unwrap(), 0.0);
            assert!((g_lambda(-1.0, 0.0, m, 1e-12).unwrap() - 0.5).abs() < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn scipy_reference_value() {
        // 1 - Φ(λ) - P(X ≥ λ, Y ≥ λ) from scipy's bivariate normal CDF.
        for m in ALL {
            let v = g_lambda(0.3, 1.3, m, 1e-12).unwrap();
            assert!((v - 0.07628325946309).abs() < 1e-11, "{m:?} {v}");
        }
    }

    #[test]
    fn methods_agree_on_grid() {
        for i in -9..=9 {
            let rho = i as f64 / 10.0;
            for lambda in [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0] {
                let vals: Vec<f64> = ALL.iter().map(|&m| g_lambda(rho, lambda, m, 1e-10).unwrap()).collect();
                for a in &vals {
                    for b in &vals {
                        assert!((a - b).abs() < 1e-9, "rho {rho} lambda {lambda}: {vals:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn fixed_term_hermite_converges() {
        let exact = g_lambda(0.4, 1.0, ExcursionMethod::Quadrature, 1e-13).unwrap();
        let few = g_lambda(0.4, 1.0, ExcursionMethod::Hermite { n_terms: Some(3) }, 1e-10).unwrap();
        let many = g_lambda(0.4, 1.0, ExcursionMethod::Hermite { n_terms: Some(60) }, 1e-10).unwrap();
        assert!((many - exact).abs() < 1e-13);
        assert!((few - exact).abs() > 1e-6);
    }

    #[test]
    fn monte_carlo_at_two() {
        let exact = g_lambda(0.0, 2.0, ExcursionMethod::Quadrature, 1e-12).unwrap();
        let p = normal_sf(2.0);
        assert!((exact - p * (1.0 - p)).abs() < 1e-12);
        let mut rng = RngSpec::new(5).rng();
        let n = 400_000;
        let mut hits = 0u32;
        for _ in 0..n {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            if (x >= 2.0) != (y >= 2.0) {
                hits += 1;
            }
        }
        let est = 0.5 * hits as f64 / n as f64;
        let sigma = (2.0 * exact * (1.0 - 2.0 * exact) / n as f64).sqrt() / 2.0;
        assert!((est - exact).abs() < 4.0 * sigma, "{est} vs {exact}");
    }

    #[test]
    fn madogram_integral() {
        for rho in [-0.5, 0.0, 0.3, 0.9] {
            let v = madogram_from_excursions(rho, 1e-9).unwrap();
            assert!((v - ((1.0 - rho) / PI).sqrt()).abs() < 1e-6, "{rho}: {v}");
        }
    }

    #[test]
    fn symmetric_and_monotone() {
        for lambda in [0.3, 1.1, 2.4] {
            let mut last = f64::INFINITY;
            for i in -9..=9 {
                let rho = i as f64 / 10.0;
                let a = g_lambda(rho, lambda, ExcursionMethod::Quadrature, 1e-12).unwrap();
                let b = g_lambda(rho, -lambda, ExcursionMethod::Quadrature, 1e-12).unwrap();
                assert!((a - b).abs() < 1e-14);
                assert!(a <= last + 1e-15);
                last = a;
            }
        }
    }
}
