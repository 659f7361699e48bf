//! Harmonic series built from a Gaussian correlation, and the pointwise
//! Gaussian transforms.

use std::f64::consts::PI;

use crate::error::{input, Error, Result};
use crate::special::gamma;

const MAX_TERMS: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarmonicSeries {
    /// `(2ϖ/π²) Σ_{k≥0} γ((2k+1) d) / (2k+1)²`
    Odd,
    /// `(4ϖ/π²) Σ_{k≥1} γ(2k d) / (4k² - 1)`
    Even,
}

impl HarmonicSeries {
    pub fn name(self) -> &'static str {
        match self {
            HarmonicSeries::Odd => "series_odd",
            HarmonicSeries::Even => "series_even",
        }
    }
}

/// Evaluates a harmonic series of the variogram `γ = 1 - ρ`, where `rho` is
/// the radial correlation (non-negative, non-increasing).
///
/// The series is rewritten as a constant minus a series in `ρ`, whose tail
/// after the current term is bounded by the current `ρ` times the tail of the
/// weight series. Summation stops once that bound is below `tol`.
pub fn harmonic_series(kind: HarmonicSeries, rho: &dyn Fn(f64) -> f64, d: f64, varpi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return input(format!("series tolerance must be positive, got {tol}"));
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    let pi2 = PI * PI;
    let (head, coef) = match kind {
        HarmonicSeries::Odd => (varpi / 4.0, 2.0 * varpi / pi2),
        HarmonicSeries::Even => (2.0 * varpi / pi2, 4.0 * varpi / pi2),
    };
    let mut sum = 0.0;
    for k in 0..MAX_TERMS {
        let (r, weight, tail_weight) = match kind {
            HarmonicSeries::Odd => {
                let m = (2 * k + 1) as f64;
                // Σ_{j>k} (2j+1)^-2 ≤ 1/(4(k+1))
                (rho(m * d), 1.0 / (m * m), 1.0 / (4.0 * (k as f64 + 1.0)))
            }
            HarmonicSeries::Even => {
                let j = (k + 1) as f64;
                // Σ_{i>j} (4i²-1)^-1 = 1/(2(2j+1))
                (rho(2.0 * j * d), 1.0 / (4.0 * j * j - 1.0), 1.0 / (2.0 * (2.0 * j + 1.0)))
            }
        };
        sum += r * weight;
        if coef * r * tail_weight <= tol {
            return Ok((head - coef * sum).max(0.0));
        }
    }
    Err(Error::Numerical(format!("{} did not reach tolerance {tol} within {MAX_TERMS} terms", kind.name())))
}

/// Median indicator variogram of a Gaussian field with correlation `rho`.
pub fn median_indicator_value(rho: f64) -> Result<f64> {
    if !(rho.abs() <= 1.0 + 1e-12) {
        return input(format!("correlation {rho} outside [-1, 1]"));
    }
    let rho = rho.clamp(-1.0, 1.0);
    // 1 - ρ is exact near ρ = 1, where acos loses digits.
    let angle = if rho > 0.5 { 2.0 * ((1.0 - rho) / 2.0).sqrt().asin() } else { rho.acos() };
    Ok(angle / (2.0 * PI))
}

/// The same variogram written through the Gaussian variogram `γ = 1 - ρ`.
pub fn median_indicator_arcsin(gamma_value: f64) -> Result<f64> {
    if !(-1e-12..=2.0 + 1e-12).contains(&gamma_value) {
        return input(format!("Gaussian variogram value {gamma_value} outside [0, 2]"));
    }
    Ok((gamma_value.clamp(0.0, 2.0) / 2.0).sqrt().asin() / PI)
}

/// Order-α variogram `½ E|Z(x) - Z(y)|^α` of a Gaussian field whose
/// variogram at the pair is `gamma_value`.
pub fn gaussian_order_alpha(gamma_value: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return input(format!("order must be positive, got {alpha}"));
    }
    if !(gamma_value >= 0.0) {
        return input(format!("variogram value must be non-negative, got {gamma_value}"));
    }
    Ok(2f64.powf(alpha - 1.0) / PI.sqrt() * gamma((alpha + 1.0) / 2.0) * gamma_value.powf(alpha / 2.0))
}
