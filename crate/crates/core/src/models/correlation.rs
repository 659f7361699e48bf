//! Correlation functions of standard Gaussian random fields.

use serde_json::{json, Value};

use crate::error::{construction, Result};
use crate::linalg::SymmetricMatrix;
use crate::spaces::{Point, Space, COINCIDENCE_TOL};
use crate::special::{bessel_k, gamma};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CorrelationFamily {
    Exponential,
    Gaussian,
    /// `(1 + h²)^-β`
    Cauchy {
        beta: f64,
    },
    /// `exp(-h^b)`, `b ∈ (0, 2]`
    Stable {
        b: f64,
    },
    Spherical,
    Cubic,
    /// Whittle-Matérn with smoothness `b`
    Matern {
        b: f64,
    },
    /// `cos(h)`: on the line, or on a sphere with scale equal to the radius.
    Cosine,
    /// `ρ ≡ 1`
    Constant,
    /// `ρ = 1` at coincident points, 0 elsewhere.
    White,
}

impl CorrelationFamily {
    pub const NAMES: &'static [&'static str] =
        &["exponential", "gaussian", "cauchy", "stable", "spherical", "cubic", "matern", "cosine", "constant", "white"];

    pub fn name(&self) -> &'static str {
        match self {
            CorrelationFamily::Exponential => "exponential",
            CorrelationFamily::Gaussian => "gaussian",
            CorrelationFamily::Cauchy { .. } => "cauchy",
            CorrelationFamily::Stable { .. } => "stable",
            CorrelationFamily::Spherical => "spherical",
            CorrelationFamily::Cubic => "cubic",
            CorrelationFamily::Matern { .. } => "matern",
            CorrelationFamily::Cosine => "cosine",
            CorrelationFamily::Constant => "constant",
            CorrelationFamily::White => "white",
        }
    }

    /// Non-negative and non-increasing in the lag.
    pub fn is_monotone_nonnegative(&self) -> bool {
        !matches!(self, CorrelationFamily::Cosine)
    }
}

/// Cubic correlation with unit range.
pub fn cubic_unit(h: f64) -> f64 {
    if h >= 1.0 {
        return 0.0;
    }
    let h2 = h * h;
    let h3 = h2 * h;
    1.0 - 7.0 * h2 + 8.75 * h3 - 3.5 * h3 * h2 + 0.75 * h3 * h2 * h2
}

/// An isotropic correlation function `ρ(d / scale)` on a host space.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianCorrelation {
    family: CorrelationFamily,
    scale: f64,
    host: Space,
}

impl GaussianCorrelation {
    /// Checks the parameters and that the family is positive definite on the
    /// host.
    pub fn new(family: CorrelationFamily, scale: f64, host: Space) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return construction(format!("{}: scale must be positive, got {scale}", family.name()));
        }
        match family {
            CorrelationFamily::Cauchy { beta } if !(beta > 0.0 && beta.is_finite()) => {
                return construction(format!("cauchy: beta must be positive, got {beta}"));
            }
            CorrelationFamily::Stable { b } if !(b > 0.0 && b <= 2.0) => {
                return construction(format!("stable: b must lie in (0, 2], got {b}"));
            }
            CorrelationFamily::Matern { b } if !(b > 0.0 && b.is_finite()) => {
                return construction(format!("matern: b must be positive, got {b}"));
            }
            _ => {}
        }
        check_host(family, scale, &host)?;
        Ok(Self { family, scale, host })
    }

    pub fn family(&self) -> CorrelationFamily {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn host(&self) -> &Space {
        &self.host
    }

    /// Correlation at lag `d`; `coincident` only matters for the white family.
    pub fn at_lag(&self, d: f64, coincident: bool) -> f64 {
        if let CorrelationFamily::White = self.family {
            return if coincident { 1.0 } else { 0.0 };
        }
        if d == 0.0 {
            return 1.0;
        }
        let h = d / self.scale;
        match self.family {
            CorrelationFamily::Exponential => (-h).exp(),
            CorrelationFamily::Gaussian => (-h * h).exp(),
            CorrelationFamily::Cauchy { beta } => (1.0 + h * h).powf(-beta),
            CorrelationFamily::Stable { b } => (-h.powf(b)).exp(),
            CorrelationFamily::Spherical => {
                if h >= 1.0 {
                    0.0
                } else {
                    1.0 - 1.5 * h + 0.5 * h * h * h
                }
            }
            CorrelationFamily::Cubic => cubic_unit(h),
            CorrelationFamily::Matern { b } => {
                if b == 0.5 {
                    (-h).exp()
                } else if h > 700.0 {
                    0.0
                } else {
                    let v = 2f64.powf(1.0 - b) / gamma(b) * h.powf(b) * bessel_k(b, h);
                    v.min(1.0)
                }
            }
            CorrelationFamily::Cosine => h.cos(),
            CorrelationFamily::Constant => 1.0,
            CorrelationFamily::White => unreachable!(),
        }
    }

    /// The associated variogram `1 - ρ`.
    pub fn variogram_at_lag(&self, d: f64, coincident: bool) -> f64 {
        1.0 - self.at_lag(d, coincident)
    }

    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        let d = self.host.distance(x, y)?;
        Ok(self.at_lag(d, self.host.coincident(x, y, d)))
    }

    /// Correlation matrix at the points (unit diagonal).
    pub fn matrix(&self, points: &[Point]) -> Result<SymmetricMatrix> {
        let d = self.host.distance_matrix(points)?;
        let mut m = SymmetricMatrix::zeros(points.len());
        for k in 0..points.len() {
            m.set(k, k, 1.0);
            for l in 0..k {
                let dk = d.get(k, l);
                let same = match (&points[k], &points[l]) {
                    (Point::Vertex(a), Point::Vertex(b)) => a == b,
                    _ => dk < COINCIDENCE_TOL,
                };
                m.set(k, l, self.at_lag(dk, same));
            }
        }
        Ok(m)
    }

    pub fn describe(&self) -> Value {
        let mut v = json!({ "family": self.family.name(), "scale": self.scale });
        match self.family {
            CorrelationFamily::Cauchy { beta } => v["beta"] = json!(beta),
            CorrelationFamily::Stable { b } | CorrelationFamily::Matern { b } => v["b"] = json!(b),
            _ => {}
        }
        v
    }
}

fn check_host(family: CorrelationFamily, scale: f64, host: &Space) -> Result<()> {
    use CorrelationFamily as F;
    let ok = match (family, host) {
        (F::Constant | F::White, _) => true,
        (F::Cosine, Space::Euclidean { dim }) => *dim == 1,
        (F::Cosine, Space::Sphere { radius, .. }) => ((scale - radius) / radius).abs() < 1e-12,
        (F::Cosine, Space::Graph(_)) => false,
        (F::Spherical | F::Cubic, Space::Euclidean { dim }) => *dim <= 3,
        (F::Spherical | F::Cubic, _) => false,
        (_, Space::Euclidean { .. }) => true,
        (_, Space::Graph(g)) => g.metric().is_euclidean(),
        (F::Exponential, Space::Sphere { .. }) => true,
        (F::Stable { b }, Space::Sphere { .. }) => b <= 1.0,
        (F::Matern { b }, Space::Sphere { .. }) => b <= 0.5,
        (_, Space::Sphere { .. }) => false,
    };
    if ok {
        Ok(())
    } else {
        construction(format!("{} correlation is not valid on {host}", family.name()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Graph, GraphMetric};

    fn r(n: usize) -> Space {
        Space::euclidean(n).unwrap()
    }

    #[test]
    fn unit_at_origin_and_bounded() {
        let fams = [
            CorrelationFamily::Exponential,
            CorrelationFamily::Gaussian,
            CorrelationFamily::Cauchy { beta: 1.5 },
            CorrelationFamily::Stable { b: 0.7 },
            CorrelationFamily::Spherical,
            CorrelationFamily::Cubic,
            CorrelationFamily::Matern { b: 0.3 },
            CorrelationFamily::Constant,
        ];
        for f in fams {
            let c = GaussianCorrelation::new(f, 2.0, r(2)).unwrap();
            assert_eq!(c.at_lag(0.0, true), 1.0);
            for i in 1..200 {
                let v = c.at_lag(i as f64 * 0.05, false);
                assert!((-1.0..=1.0).contains(&v), "{f:?} {v}");
            }
        }
    }

    #[test]
    fn matern_half_is_exponential_and_other_orders_continuous() {
        let m = GaussianCorrelation::new(CorrelationFamily::Matern { b: 0.5 }, 1.0, r(1)).unwrap();
        assert!((m.at_lag(0.7, false) - (-0.7f64).exp()).abs() < 1e-15);
        let m = GaussianCorrelation::new(CorrelationFamily::Matern { b: 0.49999999 }, 1.0, r(1)).unwrap();
        assert!((m.at_lag(0.7, false) - (-0.7f64).exp()).abs() < 1e-7);
        let m = GaussianCorrelation::new(CorrelationFamily::Matern { b: 0.25 }, 1.0, r(1)).unwrap();
        assert!(1.0 - m.at_lag(1e-9, false) < 1e-3);
    }

    #[test]
    fn cubic_vanishes_at_range() {
        assert!(cubic_unit(1.0 - 1e-12).abs() < 1e-10);
        assert_eq!(cubic_unit(1.5), 0.0);
    }

    #[test]
    fn host_restrictions() {
        assert!(GaussianCorrelation::new(CorrelationFamily::Spherical, 1.0, r(4)).is_err());
        assert!(GaussianCorrelation::new(CorrelationFamily::Gaussian, 1.0, Space::sphere(2, 1.0).unwrap()).is_err());
        assert!(GaussianCorrelation::new(CorrelationFamily::Exponential, 1.0, Space::sphere(2, 1.0).unwrap()).is_ok());
        assert!(GaussianCorrelation::new(CorrelationFamily::Cosine, 1.0, r(2)).is_err());
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let sp = Space::graph(g.clone(), GraphMetric::ShortestPath).unwrap();
        assert!(GaussianCorrelation::new(CorrelationFamily::Exponential, 1.0, sp.clone()).is_err());
        assert!(GaussianCorrelation::new(CorrelationFamily::White, 1.0, sp).is_ok());
        let res = Space::graph(g, GraphMetric::SqrtResistance).unwrap();
        assert!(GaussianCorrelation::new(CorrelationFamily::Gaussian, 1.0, res).is_ok());
        assert!(GaussianCorrelation::new(CorrelationFamily::Stable { b: 2.5 }, 1.0, r(1)).is_err());
        assert!(GaussianCorrelation::new(CorrelationFamily::Exponential, 0.0, r(1)).is_err());
    }

    #[test]
    fn correlation_matrix_unit_diagonal() {
        let c = GaussianCorrelation::new(CorrelationFamily::Exponential, 1.0, r(1)).unwrap();
        let m = c.matrix(&[vec![0.0].into(), vec![2f64.ln()].into()]).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert!((m.get(0, 1) - 0.5).abs() < 1e-15);
    }
}
