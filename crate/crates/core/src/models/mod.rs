//! Parametric indicator variograms and their closure combinators.

mod correlation;
mod series;

use std::f64::consts::PI;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{construction, Result};
use crate::spaces::{Point, Space};
use crate::special::{bessel_k, erf, erfcx, gamma, scaled_bessel_i_three_halves};

pub use correlation::{cubic_unit, CorrelationFamily, GaussianCorrelation};
pub use series::{
    gaussian_order_alpha, harmonic_series, median_indicator_arcsin, median_indicator_value, HarmonicSeries,
};

pub const DEFAULT_SERIES_TOL: f64 = 1e-10;

/// Covariance `C` of a `[-1, 1]`-valued field used by the partial-nugget model.
#[derive(Clone, Debug, PartialEq)]
pub enum NuggetCovariance {
    /// `C ≡ c`, `c ∈ [0, 1]`
    Constant(f64),
    /// `C = ρ / 2` for a continuous correlation `ρ`
    HalfCorrelation(GaussianCorrelation),
    /// `C = (18/35) cub_a` on `R^N`, `N ≤ 3`
    Cubic { range: f64 },
}

/// One component of a mixture.
#[derive(Clone, Debug, PartialEq)]
pub enum MixtureComponent {
    Correlation(GaussianCorrelation),
    Variogram(VariogramModel),
}

impl MixtureComponent {
    fn host(&self) -> &Space {
        match self {
            MixtureComponent::Correlation(c) => c.host(),
            MixtureComponent::Variogram(v) => v.host(),
        }
    }
}

/// Discrete mixing distribution: positive weights summing to at most one.
/// The missing mass, if any, sits on the constant field.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureSpec {
    atoms: Vec<(f64, MixtureComponent)>,
}

impl MixtureSpec {
    pub fn new(atoms: Vec<(f64, MixtureComponent)>) -> Result<Self> {
        if atoms.is_empty() {
            return construction("mixture needs at least one atom");
        }
        for (w, _) in &atoms {
            if !(*w > 0.0 && w.is_finite()) {
                return construction(format!("mixture weight must be positive, got {w}"));
            }
        }
        let total: f64 = atoms.iter().map(|(w, _)| w).sum();
        if total > 1.0 + 1e-12 {
            return construction(format!("mixture weights sum to {total} > 1"));
        }
        let host = atoms[0].1.host();
        if atoms.iter().any(|(_, c)| c.host() != host) {
            return construction("mixture atoms live on different spaces");
        }
        Ok(Self { atoms })
    }

    pub fn single(rho: GaussianCorrelation) -> Self {
        Self { atoms: vec![(1.0, MixtureComponent::Correlation(rho))] }
    }

    pub fn atoms(&self) -> &[(f64, MixtureComponent)] {
        &self.atoms
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|(w, _)| w).sum()
    }

    pub fn host(&self) -> &Space {
        self.atoms[0].1.host()
    }

    fn describe(&self) -> Value {
        Value::Array(
            self.atoms
                .iter()
                .map(|(w, c)| {
                    let inner = match c {
                        MixtureComponent::Correlation(r) => json!({ "correlation": r.describe() }),
                        MixtureComponent::Variogram(v) => json!({ "variogram": v.describe() }),
                    };
                    json!({ "weight": w, "component": inner })
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Tanh1 {
        lambda: f64,
    },
    Tanh2 {
        lambda: f64,
    },
    IBessel {
        lambda: f64,
    },
    Exponential {
        a: f64,
    },
    Gamma {
        a: f64,
        b: f64,
    },
    Stable {
        a: f64,
        b: f64,
    },
    Matern {
        a: f64,
        b: f64,
    },
    Series {
        kind: HarmonicSeries,
        correlation: GaussianCorrelation,
        tol: f64,
    },
    SphereLinear,
    SphereExponential {
        t: f64,
    },
    TriangularWave {
        k: u32,
    },
    CircleQuadratic,
    Nugget {
        covariance: NuggetCovariance,
    },
    /// `ϖ/4 - ϖ/4 · erfcx(√(aγ))^k`
    ErfExponential {
        correlation: GaussianCorrelation,
        a: f64,
        k: u32,
    },
    /// `ϖ/4 - ϖ/4 · [erf(1/√(aγ)) - √(aγ/π)(1 - e^{-1/(aγ)})]^k`
    ErfTent {
        correlation: GaussianCorrelation,
        a: f64,
        k: u32,
    },
    /// `Σ w_i arccos(ρ_i) / 2π`, plus `w_i g_i` for variogram atoms.
    MedianIndicator {
        mixture: MixtureSpec,
    },
    /// `sill · (1 - ρ)`: not an indicator variogram in general.
    CorrelationVariogram {
        correlation: GaussianCorrelation,
        sill: f64,
    },
    Scale {
        base: Arc<VariogramModel>,
    },
    Mix {
        first: Arc<VariogramModel>,
        second: Arc<VariogramModel>,
    },
    Product {
        first: Arc<VariogramModel>,
        second: Arc<VariogramModel>,
    },
    ExpComposite {
        base: Arc<VariogramModel>,
        t: f64,
    },
}

/// An immutable indicator-variogram model on a host space.
///
/// `varpi` is the sill factor of the families that declare one, the weight of
/// `Scale` and `Mix`, and the prefactor of `ExpComposite`; it is 1 elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct VariogramModel {
    kind: ModelKind,
    varpi: f64,
    host: Space,
}

pub const FAMILY_NAMES: &[&str] = &[
    "tanh1",
    "tanh2",
    "ibessel",
    "exponential",
    "gamma",
    "stable",
    "matern",
    "series_odd",
    "series_even",
    "sphere_linear",
    "sphere_exponential",
    "triangular_wave",
    "circle_quadratic",
    "nugget",
    "erf_exponential",
    "erf_tent",
    "median_indicator",
    "correlation_variogram",
    "scale",
    "mix",
    "product",
    "exp_composite",
];

fn check_varpi(varpi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&varpi) {
        Ok(())
    } else {
        construction(format!("varpi must lie in [0, 1], got {varpi}"))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        construction(format!("{name} must be positive, got {v}"))
    }
}

fn euclidean_like(host: &Space) -> bool {
    match host {
        Space::Euclidean { .. } => true,
        Space::Graph(g) => g.metric().is_euclidean(),
        Space::Sphere { .. } => false,
    }
}

fn unit_sphere(host: &Space) -> Option<usize> {
    match host {
        Space::Sphere { dim, radius } if *radius == 1.0 => Some(*dim),
        _ => None,
    }
}

/// The probability a Gaussian field with variogram `x = aγ` gives to two
/// tent-covariance indicators with unit half-range agreeing in sign.
fn tent_factor(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    erf(1.0 / x.sqrt()) - (x / PI).sqrt() * (-(-1.0 / x).exp_m1())
}

impl VariogramModel {
    fn build(kind: ModelKind, varpi: f64, host: Space) -> Result<Self> {
        check_varpi(varpi)?;
        let model = Self { kind, varpi, host };
        model.check_kind()?;
        Ok(model)
    }

    fn check_kind(&self) -> Result<()> {
        let host = &self.host;
        let name = self.family_name();
        match &self.kind {
            ModelKind::Tanh1 { lambda } | ModelKind::Tanh2 { lambda } => {
                check_positive("lambda", *lambda)?;
                if !euclidean_like(host) {
                    return construction(format!("{name} needs a Euclidean host, got {host}"));
                }
            }
            ModelKind::IBessel { lambda } => {
                check_positive("lambda", *lambda)?;
                if *host != (Space::Euclidean { dim: 1 }) {
                    return construction(format!("ibessel is only valid on the line, got {host}"));
                }
            }
            ModelKind::Exponential { a } => {
                check_positive("a", *a)?;
                if !euclidean_like(host) {
                    return construction(format!("{name} needs a Euclidean host, got {host}"));
                }
            }
            ModelKind::Gamma { a, b } => {
                check_positive("a", *a)?;
                check_positive("b", *b)?;
                if !euclidean_like(host) {
                    return construction(format!("{name} needs a Euclidean host, got {host}"));
                }
            }
            ModelKind::Stable { a, b } => {
                check_positive("a", *a)?;
                if !(*b > 0.0 && *b <= 1.0) {
                    return construction(format!("stable: b must lie in (0, 1], got {b}"));
                }
                if !euclidean_like(host) {
                    return construction(format!("{name} needs a Euclidean host, got {host}"));
                }
            }
            ModelKind::Matern { a, b } => {
                check_positive("a", *a)?;
                if !(*b > 0.0 && *b <= 0.5) {
                    return construction(format!("matern: b must lie in (0, 1/2], got {b}"));
                }
                if !euclidean_like(host) {
                    return construction(format!("{name} needs a Euclidean host, got {host}"));
                }
            }
            ModelKind::Series { correlation, tol, .. } => {
                check_positive("tol", *tol)?;
                if !matches!(host, Space::Euclidean { .. }) {
                    return construction(format!("{name} needs a Euclidean host, got {host}"));
                }
                if correlation.host() != host {
                    return construction(format!("{name}: correlation host differs from model host"));
                }
                if !correlation.family().is_monotone_nonnegative()
                    || matches!(correlation.family(), CorrelationFamily::Constant)
                {
                    return construction(format!(
                        "{name} needs a decaying non-negative correlation, got {}",
                        correlation.family().name()
                    ));
                }
            }
            ModelKind::SphereLinear => {
                if unit_sphere(host).is_none() {
                    return construction(format!("{name} needs a unit sphere host, got {host}"));
                }
            }
            ModelKind::SphereExponential { t } => {
                check_positive("t", *t)?;
                if unit_sphere(host).is_none() {
                    return construction(format!("{name} needs a unit sphere host, got {host}"));
                }
            }
            ModelKind::TriangularWave { k } => {
                if *k == 0 {
                    return construction("triangular_wave: k must be a positive integer");
                }
                if unit_sphere(host) != Some(1) {
                    return construction(format!("{name} needs the unit circle, got {host}"));
                }
            }
            ModelKind::CircleQuadratic => {
                if unit_sphere(host) != Some(1) {
                    return construction(format!("{name} needs the unit circle, got {host}"));
                }
            }
            ModelKind::Nugget { covariance } => match covariance {
                NuggetCovariance::Constant(c) => {
                    if !(0.0..=1.0).contains(c) {
                        return construction(format!("nugget: constant covariance must lie in [0, 1], got {c}"));
                    }
                }
                NuggetCovariance::HalfCorrelation(rho) => {
                    if rho.host() != host {
                        return construction("nugget: correlation host differs from model host");
                    }
                    if matches!(rho.family(), CorrelationFamily::White) {
                        return construction("nugget: correlation must be continuous");
                    }
                }
                NuggetCovariance::Cubic { range } => {
                    check_positive("range", *range)?;
                    if !matches!(host, Space::Euclidean { dim } if *dim <= 3) {
                        return construction(format!("nugget cubic covariance needs R^N with N <= 3, got {host}"));
                    }
                }
            },
            ModelKind::ErfExponential { correlation, a, k } | ModelKind::ErfTent { correlation, a, k } => {
                check_positive("a", *a)?;
                if *k == 0 {
                    return construction(format!("{name}: k must be a positive integer"));
                }
                if correlation.host() != host {
                    return construction(format!("{name}: correlation host differs from model host"));
                }
            }
            ModelKind::MedianIndicator { mixture } => {
                if mixture.host() != host {
                    return construction("median_indicator: mixture host differs from model host");
                }
            }
            ModelKind::CorrelationVariogram { correlation, sill } => {
                if !(*sill >= 0.0 && sill.is_finite()) {
                    return construction(format!("correlation_variogram: sill must be non-negative, got {sill}"));
                }
                if correlation.host() != host {
                    return construction("correlation_variogram: correlation host differs from model host");
                }
            }
            ModelKind::Scale { base } | ModelKind::ExpComposite { base, .. } => {
                if base.host() != host {
                    return construction(format!("{name}: operand host differs"));
                }
                if let ModelKind::ExpComposite { t, .. } = &self.kind {
                    check_positive("t", *t)?;
                }
            }
            ModelKind::Mix { first, second } | ModelKind::Product { first, second } => {
                if first.host() != host || second.host() != host {
                    return construction(format!("{name}: operands live on different spaces"));
                }
            }
        }
        Ok(())
    }

    pub fn tanh1(lambda: f64, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::Tanh1 { lambda }, varpi, host)
    }

    pub fn tanh2(lambda: f64, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::Tanh2 { lambda }, varpi, host)
    }

    pub fn ibessel(lambda: f64, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::IBessel { lambda }, varpi, host)
    }

    pub fn exponential(a: f64, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::Exponential { a }, varpi, host)
    }

    pub fn gamma(a: f64, b: f64, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::Gamma { a, b }, varpi, host)
    }

    pub fn stable(a: f64, b: f64, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::Stable { a, b }, varpi, host)
    }

    pub fn matern(a: f64, b: f64, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::Matern { a, b }, varpi, host)
    }

    pub fn series(kind: HarmonicSeries, correlation: GaussianCorrelation, varpi: f64, tol: f64) -> Result<Self> {
        let host = correlation.host().clone();
        Self::build(ModelKind::Series { kind, correlation, tol }, varpi, host)
    }

    pub fn sphere_linear(varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::SphereLinear, varpi, host)
    }

    pub fn sphere_exponential(t: f64, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::SphereExponential { t }, varpi, host)
    }

    pub fn triangular_wave(k: u32, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::TriangularWave { k }, varpi, host)
    }

    pub fn circle_quadratic(varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::CircleQuadratic, varpi, host)
    }

    pub fn nugget(covariance: NuggetCovariance, varpi: f64, host: Space) -> Result<Self> {
        Self::build(ModelKind::Nugget { covariance }, varpi, host)
    }

    pub fn erf_exponential(correlation: GaussianCorrelation, a: f64, k: u32, varpi: f64) -> Result<Self> {
        let host = correlation.host().clone();
        Self::build(ModelKind::ErfExponential { correlation, a, k }, varpi, host)
    }

    pub fn erf_tent(correlation: GaussianCorrelation, a: f64, k: u32, varpi: f64) -> Result<Self> {
        let host = correlation.host().clone();
        Self::build(ModelKind::ErfTent { correlation, a, k }, varpi, host)
    }

    /// Median indicator variogram of a Gaussian field with correlation `rho`.
    pub fn median_indicator(rho: GaussianCorrelation) -> Self {
        let host = rho.host().clone();
        Self { kind: ModelKind::MedianIndicator { mixture: MixtureSpec::single(rho) }, varpi: 1.0, host }
    }

    pub fn median_indicator_mixture(mixture: MixtureSpec) -> Result<Self> {
        let host = mixture.host().clone();
        Self::build(ModelKind::MedianIndicator { mixture }, 1.0, host)
    }

    pub fn correlation_variogram(correlation: GaussianCorrelation, sill: f64) -> Result<Self> {
        let host = correlation.host().clone();
        Self::build(ModelKind::CorrelationVariogram { correlation, sill }, 1.0, host)
    }

    /// `ϖ g`
    pub fn scale(base: VariogramModel, varpi: f64) -> Result<Self> {
        let host = base.host.clone();
        Self::build(ModelKind::Scale { base: Arc::new(base) }, varpi, host)
    }

    /// `ϖ g + (1 - ϖ) g'`
    pub fn mix(first: VariogramModel, second: VariogramModel, varpi: f64) -> Result<Self> {
        let host = first.host.clone();
        Self::build(ModelKind::Mix { first: Arc::new(first), second: Arc::new(second) }, varpi, host)
    }

    /// `g + g' - 4 g g'`
    pub fn product(first: VariogramModel, second: VariogramModel) -> Result<Self> {
        let host = first.host.clone();
        Self::build(ModelKind::Product { first: Arc::new(first), second: Arc::new(second) }, 1.0, host)
    }

    /// `ϖ/4 (1 - exp(-t g))`
    pub fn exp_composite(base: VariogramModel, t: f64, varpi: f64) -> Result<Self> {
        let host = base.host.clone();
        Self::build(ModelKind::ExpComposite { base: Arc::new(base), t }, varpi, host)
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn varpi(&self) -> f64 {
        self.varpi
    }

    pub fn host(&self) -> &Space {
        &self.host
    }

    pub fn family_name(&self) -> &'static str {
        match &self.kind {
            ModelKind::Tanh1 { .. } => "tanh1",
            ModelKind::Tanh2 { .. } => "tanh2",
            ModelKind::IBessel { .. } => "ibessel",
            ModelKind::Exponential { .. } => "exponential",
            ModelKind::Gamma { .. } => "gamma",
            ModelKind::Stable { .. } => "stable",
            ModelKind::Matern { .. } => "matern",
            ModelKind::Series { kind, .. } => kind.name(),
            ModelKind::SphereLinear => "sphere_linear",
            ModelKind::SphereExponential { .. } => "sphere_exponential",
            ModelKind::TriangularWave { .. } => "triangular_wave",
            ModelKind::CircleQuadratic => "circle_quadratic",
            ModelKind::Nugget { .. } => "nugget",
            ModelKind::ErfExponential { .. } => "erf_exponential",
            ModelKind::ErfTent { .. } => "erf_tent",
            ModelKind::MedianIndicator { .. } => "median_indicator",
            ModelKind::CorrelationVariogram { .. } => "correlation_variogram",
            ModelKind::Scale { .. } => "scale",
            ModelKind::Mix { .. } => "mix",
            ModelKind::Product { .. } => "product",
            ModelKind::ExpComposite { .. } => "exp_composite",
        }
    }

    /// Whether the model is guaranteed to be an indicator variogram.
    pub fn is_catalog(&self) -> bool {
        match &self.kind {
            ModelKind::CorrelationVariogram { .. } => false,
            ModelKind::MedianIndicator { mixture } => mixture.atoms.iter().all(|(_, c)| match c {
                MixtureComponent::Correlation(_) => true,
                MixtureComponent::Variogram(v) => v.is_catalog(),
            }),
            ModelKind::Scale { base } | ModelKind::ExpComposite { base, .. } => base.is_catalog(),
            ModelKind::Mix { first, second } | ModelKind::Product { first, second } => {
                first.is_catalog() && second.is_catalog()
            }
            _ => true,
        }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        let d = self.host.distance(x, y)?;
        Ok(self.at_lag(d, self.host.coincident(x, y, d)))
    }

    /// Value at distance `d`; `coincident` says whether the two points are the
    /// same point of the host (only the nugget and white-noise parts use it).
    pub fn at_lag(&self, d: f64, coincident: bool) -> f64 {
        let w = self.varpi;
        match &self.kind {
            ModelKind::Tanh1 { lambda } => {
                if d == 0.0 {
                    0.0
                } else {
                    w * d / (4.0 * lambda) * (lambda / d).tanh()
                }
            }
            ModelKind::Tanh2 { lambda } => {
                if d == 0.0 {
                    0.0
                } else {
                    let th = (lambda / d).tanh();
                    w / 8.0 * (3.0 * d / lambda * th + th * th - 1.0)
                }
            }
            ModelKind::IBessel { lambda } => {
                if d == 0.0 {
                    0.0
                } else {
                    let s = lambda / d;
                    let denom = 2.0 * s.sqrt() * (-(-s).exp_m1());
                    3.0 * w * PI.sqrt() / denom * scaled_bessel_i_three_halves(s / 2.0)
                }
            }
            ModelKind::Exponential { a } => -w / 4.0 * (-a * d).exp_m1(),
            ModelKind::Gamma { a, b } => w / 4.0 * (1.0 - (1.0 + d / a).powf(-b)),
            ModelKind::Stable { a, b } => {
                if d == 0.0 {
                    0.0
                } else {
                    -w / 4.0 * (-a * d.powf(*b)).exp_m1()
                }
            }
            ModelKind::Matern { a, b } => {
                if d == 0.0 {
                    return 0.0;
                }
                let h = d / a;
                if *b == 0.5 {
                    return -w / 4.0 * (-h).exp_m1();
                }
                let tail =
                    if h > 700.0 { 0.0 } else { h.powf(*b) * bessel_k(*b, h) / (2f64.powf(b + 1.0) * gamma(*b)) };
                (w / 4.0 - w * tail).max(0.0)
            }
            ModelKind::Series { kind, correlation, tol } => {
                let rho = |h: f64| correlation.at_lag(h, false);
                harmonic_series(*kind, &rho, d, w, *tol).unwrap_or(f64::NAN)
            }
            ModelKind::SphereLinear => w * d / (2.0 * PI),
            ModelKind::SphereExponential { t } => -w / 4.0 * (-t * d).exp_m1(),
            ModelKind::TriangularWave { k } => {
                let r = (*k as f64 * d).rem_euclid(2.0 * PI);
                w / (2.0 * PI) * r.min(2.0 * PI - r)
            }
            ModelKind::CircleQuadratic => 3.0 * w / (8.0 * PI * PI) * d * (2.0 * PI - d),
            ModelKind::Nugget { covariance } => {
                if coincident {
                    return 0.0;
                }
                let c = match covariance {
                    NuggetCovariance::Constant(c) => *c,
                    NuggetCovariance::HalfCorrelation(rho) => 0.5 * rho.at_lag(d, false),
                    NuggetCovariance::Cubic { range } => 18.0 / 35.0 * cubic_unit(d / range),
                };
                w / 4.0 * (1.0 - c)
            }
            ModelKind::ErfExponential { correlation, a, k } => {
                let x = a * correlation.variogram_at_lag(d, coincident).max(0.0);
                w / 4.0 * (1.0 - erfcx(x.sqrt()).powi(*k as i32))
            }
            ModelKind::ErfTent { correlation, a, k } => {
                let x = a * correlation.variogram_at_lag(d, coincident).max(0.0);
                w / 4.0 * (1.0 - tent_factor(x).powi(*k as i32))
            }
            ModelKind::MedianIndicator { mixture } => mixture
                .atoms
                .iter()
                .map(|(wi, c)| {
                    wi * match c {
                        MixtureComponent::Correlation(rho) => {
                            median_indicator_value(rho.at_lag(d, coincident)).unwrap_or(f64::NAN)
                        }
                        MixtureComponent::Variogram(g) => g.at_lag(d, coincident),
                    }
                })
                .sum(),
            ModelKind::CorrelationVariogram { correlation, sill } => sill * correlation.variogram_at_lag(d, coincident),
            ModelKind::Scale { base } => w * base.at_lag(d, coincident),
            ModelKind::Mix { first, second } => {
                w * first.at_lag(d, coincident) + (1.0 - w) * second.at_lag(d, coincident)
            }
            ModelKind::Product { first, second } => {
                let g1 = first.at_lag(d, coincident);
                let g2 = second.at_lag(d, coincident);
                g1 + g2 - 4.0 * g1 * g2
            }
            ModelKind::ExpComposite { base, t } => -w / 4.0 * (-t * base.at_lag(d, coincident)).exp_m1(),
        }
    }

    /// JSON description of the model tree.
    pub fn describe(&self) -> Value {
        let mut v = json!({ "family": self.family_name(), "host": self.host.to_string() });
        let params = match &self.kind {
            ModelKind::Tanh1 { lambda } | ModelKind::Tanh2 { lambda } | ModelKind::IBessel { lambda } => {
                json!({ "lambda": lambda, "varpi": self.varpi })
            }
            ModelKind::Exponential { a } => json!({ "a": a, "varpi": self.varpi }),
            ModelKind::Gamma { a, b } | ModelKind::Stable { a, b } | ModelKind::Matern { a, b } => {
                json!({ "a": a, "b": b, "varpi": self.varpi })
            }
            ModelKind::Series { correlation, tol, .. } => {
                json!({ "varpi": self.varpi, "tol": tol, "correlation": correlation.describe() })
            }
            ModelKind::SphereLinear | ModelKind::CircleQuadratic => json!({ "varpi": self.varpi }),
            ModelKind::SphereExponential { t } => json!({ "t": t, "varpi": self.varpi }),
            ModelKind::TriangularWave { k } => json!({ "k": k, "varpi": self.varpi }),
            ModelKind::Nugget { covariance } => {
                let c = match covariance {
                    NuggetCovariance::Constant(c) => json!({ "constant": c }),
                    NuggetCovariance::HalfCorrelation(rho) => json!({ "half_correlation": rho.describe() }),
                    NuggetCovariance::Cubic { range } => json!({ "cubic_range": range }),
                };
                json!({ "varpi": self.varpi, "covariance": c })
            }
            ModelKind::ErfExponential { correlation, a, k } | ModelKind::ErfTent { correlation, a, k } => {
                json!({ "a": a, "k": k, "varpi": self.varpi, "correlation": correlation.describe() })
            }
            ModelKind::MedianIndicator { mixture } => json!({ "mixture": mixture.describe() }),
            ModelKind::CorrelationVariogram { correlation, sill } => {
                json!({ "sill": sill, "correlation": correlation.describe() })
            }
            ModelKind::Scale { base } => json!({ "varpi": self.varpi, "base": base.describe() }),
            ModelKind::Mix { first, second } => {
                json!({ "varpi": self.varpi, "first": first.describe(), "second": second.describe() })
            }
            ModelKind::Product { first, second } => json!({ "first": first.describe(), "second": second.describe() }),
            ModelKind::ExpComposite { base, t } => json!({ "t": t, "varpi": self.varpi, "base": base.describe() }),
        };
        v["params"] = params;
        v
    }
}
