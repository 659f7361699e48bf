//! Experimental variograms of order α over realization ensembles.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::simulate::{Layout, RealizationEnsemble, Values};
use crate::spaces::{Point, Space};

pub const DEFAULT_NEAR_ORIGIN_LAGS: usize = 4;
const AXIS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Omnidirectional,
    /// Pairs displaced along one coordinate axis only.
    Axis(usize),
}

/// Half-open bins `[c - tol, c + tol)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagBins {
    pub direction: Direction,
    pub centers: Vec<f64>,
    pub tolerance: f64,
}

impl LagBins {
    pub fn new(direction: Direction, centers: Vec<f64>, tolerance: f64) -> Result<Self> {
        if centers.is_empty() {
            return input("at least one lag bin is needed");
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return input(format!("bin tolerance must be positive, got {tolerance}"));
        }
        if centers.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return input("lag centers must be positive");
        }
        if centers.windows(2).any(|w| w[1] - w[0] < 2.0 * tolerance * (1.0 - 1e-12)) {
            return input("lag centers must increase by at least twice the tolerance");
        }
        Ok(Self { direction, centers, tolerance })
    }

    /// Centers `spacing, 2·spacing, …, n·spacing` with half-spacing tolerance.
    pub fn regular(direction: Direction, spacing: f64, n: usize) -> Result<Self> {
        Self::new(direction, (1..=n).map(|k| k as f64 * spacing).collect(), spacing / 2.0)
    }

    fn bin_of(&self, lag: f64) -> Option<usize> {
        let i = self.centers.partition_point(|&c| c + self.tolerance <= lag);
        (i < self.centers.len() && lag >= self.centers[i] - self.tolerance).then_some(i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub lag: f64,
    pub estimate: f64,
    pub pair_count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentalCurve {
    pub alpha: f64,
    /// Pair-count weighted average over realizations.
    pub ensemble: Vec<CurvePoint>,
    pub per_realization: Vec<Vec<CurvePoint>>,
    pub warnings: Vec<String>,
}

impl ExperimentalCurve {
    /// `lag,estimate,pair_count,realization`, ensemble rows last with
    /// realization -1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,estimate,pair_count,realization\n");
        for (i, curve) in self.per_realization.iter().enumerate() {
            for p in curve {
                let _ = writeln!(out, "{},{},{},{}", p.lag, p.estimate, p.pair_count, i);
            }
        }
        for p in &self.ensemble {
            let _ = writeln!(out, "{},{},{},-1", p.lag, p.estimate, p.pair_count);
        }
        out
    }
}

fn along_axis(x: &[f64], y: &[f64], axis: usize) -> bool {
    x.iter().zip(y).enumerate().all(|(i, (a, b))| i == axis || (a - b).abs() <= AXIS_TOL)
}

/// Point pairs of each bin.
fn bin_pairs(layout: &Layout, bins: &LagBins) -> Result<Vec<Vec<(u32, u32)>>> {
    let mut pairs = vec![Vec::new(); bins.centers.len()];
    match layout {
        Layout::Grid(g) => {
            let axes: &[usize] = match bins.direction {
                Direction::Axis(0) => &[0],
                Direction::Axis(1) => &[1],
                Direction::Axis(a) => return input(format!("grids have axes 0 and 1, got {a}")),
                Direction::Omnidirectional => &[0, 1],
            };
            for &axis in axes {
                let len = if axis == 0 { g.nx } else { g.ny };
                for k in 1..len {
                    let Some(b) = bins.bin_of(k as f64 * g.spacing) else { continue };
                    for iy in 0..g.ny {
                        for ix in 0..g.nx {
                            let (jx, jy) = if axis == 0 { (ix + k, iy) } else { (ix, iy + k) };
                            if jx < g.nx && jy < g.ny {
                                pairs[b].push((g.index(ix, iy) as u32, g.index(jx, jy) as u32));
                            }
                        }
                    }
                }
            }
        }
        Layout::Points { space, points } => {
            if let Direction::Axis(a) = bins.direction {
                match space {
                    Space::Euclidean { dim } if a < *dim => {}
                    _ => return input(format!("axis {a} is not a coordinate axis of {space}")),
                }
            }
            let d = space.distance_matrix(points)?;
            for k in 0..points.len() {
                for l in k + 1..points.len() {
                    if let (Direction::Axis(a), Point::Coords(x), Point::Coords(y)) =
                        (bins.direction, &points[k], &points[l])
                    {
                        if !along_axis(x, y, a) {
                            continue;
                        }
                    }
                    if let Some(b) = bins.bin_of(d.get(k, l)) {
                        pairs[b].push((k as u32, l as u32));
                    }
                }
            }
        }
    }
    Ok(pairs)
}

/// `½ · mean |Z(x) - Z(y)|^α` over the pairs of each bin, per realization and
/// pooled over the ensemble. Empty bins are omitted with a warning.
pub fn experimental_variogram(ens: &RealizationEnsemble, bins: &LagBins, alpha: f64) -> Result<ExperimentalCurve> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return input(format!("order alpha must be positive, got {alpha}"));
    }
    let pairs = bin_pairs(&ens.layout, bins)?;
    let mut warnings = Vec::new();
    let kept: Vec<usize> = (0..pairs.len())
        .filter(|&b| {
            let empty = pairs[b].is_empty();
            if empty {
                warnings.push(format!("bin at lag {} has no pairs and is omitted", bins.centers[b]));
            }
            !empty
        })
        .collect();
    let sums: Vec<Vec<f64>> = (0..ens.n_real())
        .into_par_iter()
        .map(|i| {
            kept.iter()
                .map(|&b| match &ens.values {
                    // |ΔZ|^α = |ΔZ| for binary values, whatever α.
                    Values::Binary(v) => {
                        let z = &v[i];
                        pairs[b].iter().filter(|&&(p, q)| z[p as usize] != z[q as usize]).count() as f64
                    }
                    Values::Real(v) => {
                        let z = &v[i];
                        pairs[b].iter().map(|&(p, q)| (z[p as usize] - z[q as usize]).abs().powf(alpha)).sum()
                    }
                })
                .collect()
        })
        .collect();
    let per_realization: Vec<Vec<CurvePoint>> = sums
        .iter()
        .map(|s| {
            kept.iter()
                .zip(s)
                .map(|(&b, &sum)| {
                    let count = pairs[b].len() as u64;
                    CurvePoint { lag: bins.centers[b], estimate: 0.5 * sum / count as f64, pair_count: count }
                })
                .collect()
        })
        .collect();
    let ensemble = kept
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let count = pairs[b].len() as u64 * ens.n_real() as u64;
            let total: f64 = sums.iter().map(|s| s[j]).sum();
            CurvePoint { lag: bins.centers[b], estimate: 0.5 * total / count as f64, pair_count: count }
        })
        .collect();
    Ok(ExperimentalCurve { alpha, ensemble, per_realization, warnings })
}

/// Least-squares slope of `log estimate` against `log lag` over the first
/// `n_lags` bins of the ensemble curve.
pub fn near_origin_exponent(curve: &ExperimentalCurve, n_lags: usize) -> Result<f64> {
    if n_lags < 2 {
        return input("at least two lags are needed for a slope");
    }
    if curve.ensemble.len() < n_lags {
        return input(format!("curve has {} bins, {n_lags} requested", curve.ensemble.len()));
    }
    let pts = &curve.ensemble[..n_lags];
    if let Some(p) = pts.iter().find(|p| !(p.estimate > 0.0)) {
        return Err(Error::Numerical(format!("estimate {} at lag {} has no logarithm", p.estimate, p.lag)));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.lag.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.estimate.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n_lags as f64;
    let my = ys.iter().sum::<f64>() / n_lags as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CorrelationFamily, GaussianCorrelation, MixtureSpec};
    use crate::rng::RngSpec;
    use crate::simulate::{simulate_median_indicator, GridSpec, Provenance};
    use serde_json::json;

    fn ensemble(layout: Layout, values: Values) -> RealizationEnsemble {
        let n_real = values.n_real();
        RealizationEnsemble {
            layout,
            values,
            provenance: Provenance {
                algorithm: "test".into(),
                model: json!(null),
                rng: RngSpec::new(0),
                n_real,
                params: json!({}),
                diagnostics: json!({}),
            },
        }
    }

    fn line_layout(n: usize) -> Layout {
        Layout::Points {
            space: Space::euclidean(1).unwrap(),
            points: (0..n).map(|i| Point::from(vec![i as f64])).collect(),
        }
    }

    fn synthetic(f: impl Fn(f64) -> f64) -> ExperimentalCurve {
        let ensemble =
            (1..=6).map(|k| CurvePoint { lag: k as f64 * 0.1, estimate: f(k as f64 * 0.1), pair_count: 1 }).collect();
        ExperimentalCurve { alpha: 2.0, ensemble, per_realization: vec![], warnings: vec![] }
    }

    #[test]
    fn constant_field_is_zero() {
        let ens = ensemble(line_layout(5), Values::Binary(vec![vec![1; 5]; 3]));
        let c =
            experimental_variogram(&ens, &LagBins::regular(Direction::Omnidirectional, 1.0, 4).unwrap(), 2.0).unwrap();
        assert!(c.ensemble.iter().all(|p| p.estimate == 0.0));
        assert_eq!(c.ensemble[0].pair_count, 4 * 3);
    }

    #[test]
    fn linear_field() {
        let ens = ensemble(line_layout(6), Values::Real(vec![(0..6).map(|i| i as f64).collect()]));
        let bins = LagBins::regular(Direction::Omnidirectional, 1.0, 5).unwrap();
        let two = experimental_variogram(&ens, &bins, 2.0).unwrap();
        let one = experimental_variogram(&ens, &bins, 1.0).unwrap();
        for (k, (a, b)) in two.ensemble.iter().zip(&one.ensemble).enumerate() {
            let h = (k + 1) as f64;
            assert!((a.estimate - h * h / 2.0).abs() < 1e-12);
            assert!((b.estimate - h / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_estimates_ignore_alpha() {
        let rho = GaussianCorrelation::new(CorrelationFamily::Exponential, 1.0, Space::euclidean(1).unwrap()).unwrap();
        let pts: Vec<Point> = (0..8).map(|i| Point::from(vec![i as f64 * 0.3])).collect();
        let ens = simulate_median_indicator(&MixtureSpec::single(rho), &pts, 200, RngSpec::new(1)).unwrap();
        let bins = LagBins::regular(Direction::Omnidirectional, 0.3, 6).unwrap();
        let a = experimental_variogram(&ens, &bins, 0.5).unwrap();
        let b = experimental_variogram(&ens, &bins, 2.0).unwrap();
        assert_eq!(a.ensemble, b.ensemble);
    }

    #[test]
    fn grid_axis_pairs() {
        let g = GridSpec::new(4, 3, 2.0).unwrap();
        let mut v = vec![0u8; 12];
        // columns alternate along the first axis
        for iy in 0..3 {
            for ix in 0..4 {
                v[g.index(ix, iy)] = (ix % 2) as u8;
            }
        }
        let ens = ensemble(Layout::Grid(g), Values::Binary(vec![v]));
        let x = experimental_variogram(&ens, &LagBins::regular(Direction::Axis(0), 2.0, 3).unwrap(), 1.0).unwrap();
        assert_eq!(x.ensemble[0].pair_count, 9);
        assert_eq!(x.ensemble[0].estimate, 0.5);
        assert_eq!(x.ensemble[1].estimate, 0.0);
        let y = experimental_variogram(&ens, &LagBins::regular(Direction::Axis(1), 2.0, 3).unwrap(), 1.0).unwrap();
        assert_eq!(y.ensemble.len(), 2);
        assert_eq!(y.warnings.len(), 1);
        assert!(y.ensemble.iter().all(|p| p.estimate == 0.0));
    }

    #[test]
    fn exponents() {
        assert!((near_origin_exponent(&synthetic(|h| h), 4).unwrap() - 1.0).abs() < 1e-12);
        assert!((near_origin_exponent(&synthetic(|h| h * h), 4).unwrap() - 2.0).abs() < 1e-12);
        assert!(near_origin_exponent(&synthetic(|h| if h < 0.25 { 0.0 } else { h }), 4).is_err());
    }

    #[test]
    fn bins_validate() {
        assert!(LagBins::new(Direction::Omnidirectional, vec![1.0, 1.5], 0.5).is_err());
        assert!(LagBins::new(Direction::Omnidirectional, vec![0.0, 1.5], 0.5).is_err());
        let b = LagBins::new(Direction::Omnidirectional, vec![1.0, 2.0], 0.5).unwrap();
        assert_eq!(b.bin_of(1.5), Some(1));
        assert_eq!(b.bin_of(0.5), Some(0));
        assert_eq!(b.bin_of(2.5), None);
    }

    #[test]
    fn csv_layout() {
        let ens = ensemble(line_layout(3), Values::Binary(vec![vec![0, 1, 1], vec![1, 1, 1]]));
        let c =
            experimental_variogram(&ens, &LagBins::regular(Direction::Omnidirectional, 1.0, 2).unwrap(), 1.0).unwrap();
        let csv = c.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "lag,estimate,pair_count,realization");
        assert_eq!(lines.len(), 1 + 2 * 2 + 2);
        assert_eq!(lines[5], "1,0.125,4,-1");
    }
}
