//! Seeded realization ensembles.
//!
//! Realization `i` of an ensemble started at `RngSpec { seed, stream }` draws
//! only from stream `stream + i`, so ensembles are bit-identical whatever the
//! number of worker threads.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{input, Error, Result};
use crate::linalg::{cholesky, covariance_factor, Cholesky, SymmetricMatrix};
use crate::models::{GaussianCorrelation, MixtureComponent, MixtureSpec, VariogramModel};
use crate::rng::RngSpec;
use crate::spaces::{Point, Space};

pub const DEFAULT_GRID_CAP: usize = 1_000_000;
pub const DEFAULT_Q: usize = 500;
pub const DEFAULT_MAX_DATA: usize = 24;
const KRIGING_RIDGE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, spacing: f64) -> Result<Self> {
        Self::with_cap(nx, ny, spacing, DEFAULT_GRID_CAP)
    }

    pub fn with_cap(nx: usize, ny: usize, spacing: f64, cap: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return input(format!("grid dimensions must be positive, got {nx} x {ny}"));
        }
        if nx.saturating_mul(ny) > cap {
            return input(format!("grid {nx} x {ny} exceeds the node cap {cap}"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return input(format!("grid spacing must be positive, got {spacing}"));
        }
        Ok(Self { nx, ny, spacing })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node index of `(ix, iy)`.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix + self.nx * iy
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.ny)
            .flat_map(|iy| (0..self.nx).map(move |ix| (ix, iy)))
            .map(|(ix, iy)| Point::from(vec![ix as f64 * self.spacing, iy as f64 * self.spacing]))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum Layout {
    Points { space: Space, points: Vec<Point> },
    Grid(GridSpec),
}

impl Layout {
    pub fn len(&self) -> usize {
        match self {
            Layout::Points { points, .. } => points.len(),
            Layout::Grid(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Binary(Vec<Vec<u8>>),
    Real(Vec<Vec<f64>>),
}

impl Values {
    pub fn n_real(&self) -> usize {
        match self {
            Values::Binary(v) => v.len(),
            Values::Real(v) => v.len(),
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Values::Binary(_))
    }

    pub fn value(&self, realization: usize, point: usize) -> f64 {
        match self {
            Values::Binary(v) => v[realization][point] as f64,
            Values::Real(v) => v[realization][point],
        }
    }
}

/// Everything needed to regenerate an ensemble.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub algorithm: String,
    pub model: Value,
    pub rng: RngSpec,
    pub n_real: usize,
    pub params: Value,
    pub diagnostics: Value,
}

#[derive(Clone, Debug)]
pub struct RealizationEnsemble {
    pub layout: Layout,
    pub values: Values,
    pub provenance: Provenance,
}

impl RealizationEnsemble {
    pub fn n_real(&self) -> usize {
        self.values.n_real()
    }

    /// Ensemble mean at each point.
    pub fn point_means(&self) -> Vec<f64> {
        let n = self.layout.len();
        let r = self.n_real() as f64;
        (0..n).map(|p| (0..self.n_real()).map(|i| self.values.value(i, p)).sum::<f64>() / r).collect()
    }

    /// Spatial mean of each realization.
    pub fn realization_means(&self) -> Vec<f64> {
        let n = self.layout.len() as f64;
        (0..self.n_real()).map(|i| (0..self.layout.len()).map(|p| self.values.value(i, p)).sum::<f64>() / n).collect()
    }
}

fn standard_normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Draws `L w` with `L Lᵀ = cov` (plus a ridge if needed).
pub fn sample_gaussian_vector(cov: &SymmetricMatrix, rng: RngSpec) -> Result<Vec<f64>> {
    let factor = covariance_factor(cov)?;
    Ok(factor.mul_vec(&standard_normals(&mut rng.rng(), cov.n())))
}

fn check_n_real(n_real: usize) -> Result<()> {
    if n_real == 0 {
        return input("number of realizations must be positive");
    }
    Ok(())
}

fn validate_points(space: &Space, points: &[Point]) -> Result<()> {
    if points.is_empty() {
        return input("no points to simulate at");
    }
    points.iter().try_for_each(|p| space.validate_point(p))
}

/// Thresholded Gaussian vectors; atom `j` is chosen with probability
/// `weights[j]`. A single atom of weight one consumes no selection draw.
fn threshold_ensemble(
    factors: &[Cholesky],
    weights: &[f64],
    threshold: f64,
    n: usize,
    n_real: usize,
    rng: RngSpec,
) -> Vec<Vec<u8>> {
    let single = weights.len() == 1 && weights[0] == 1.0;
    (0..n_real)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.realization(i).rng();
            let atom = if single {
                0
            } else {
                let u: f64 = r.random();
                let mut acc = 0.0;
                weights
                    .iter()
                    .position(|w| {
                        acc += w;
                        u < acc
                    })
                    .unwrap_or(weights.len() - 1)
            };
            let y = factors[atom].mul_vec(&standard_normals(&mut r, n));
            y.iter().map(|&v| u8::from(v >= threshold)).collect()
        })
        .collect()
}

fn correlation_factor(rho: &GaussianCorrelation, points: &[Point], label: &str) -> Result<Cholesky> {
    let m = rho.matrix(points)?;
    covariance_factor(&m).map_err(|e| Error::Numerical(format!("{label}: {e}")))
}

/// Median indicators of the mixture `Σ w_j Y_j`: pick an atom, draw its
/// Gaussian vector, keep the sign. Missing mass goes to the constant field.
pub fn simulate_median_indicator(
    mix: &MixtureSpec,
    points: &[Point],
    n_real: usize,
    rng: RngSpec,
) -> Result<RealizationEnsemble> {
    check_n_real(n_real)?;
    validate_points(mix.host(), points)?;
    let n = points.len();
    let mut factors = Vec::new();
    let mut weights = Vec::new();
    for (j, (w, c)) in mix.atoms().iter().enumerate() {
        let MixtureComponent::Correlation(rho) = c else {
            return Err(Error::Unsupported(format!(
                "mixture atom {j} is a variogram; only correlation atoms can be simulated"
            )));
        };
        factors.push(correlation_factor(rho, points, &format!("mixture atom {j} ({})", rho.family().name()))?);
        weights.push(*w);
    }
    let missing = 1.0 - mix.total_weight();
    if missing > 1e-12 {
        factors.push(covariance_factor(&SymmetricMatrix::from_fn(n, |_, _| 1.0))?);
        weights.push(missing);
    }
    let values = threshold_ensemble(&factors, &weights, 0.0, n, n_real, rng);
    let atoms: Vec<Value> = mix
        .atoms()
        .iter()
        .map(|(w, c)| match c {
            MixtureComponent::Correlation(r) => json!({ "weight": w, "correlation": r.describe() }),
            MixtureComponent::Variogram(v) => json!({ "weight": w, "variogram": v.describe() }),
        })
        .collect();
    Ok(RealizationEnsemble {
        layout: Layout::Points { space: mix.host().clone(), points: points.to_vec() },
        values: Values::Binary(values),
        provenance: Provenance {
            algorithm: "median_indicator".into(),
            model: json!({ "mixture": atoms, "constant_weight": missing.max(0.0) }),
            rng,
            n_real,
            params: json!({ "threshold": 0.0 }),
            diagnostics: json!({}),
        },
    })
}

/// Indicators `1{Y ≥ threshold}` of a standard Gaussian field.
pub fn simulate_excursion(
    rho: &GaussianCorrelation,
    threshold: f64,
    points: &[Point],
    n_real: usize,
    rng: RngSpec,
) -> Result<RealizationEnsemble> {
    check_n_real(n_real)?;
    if threshold.is_nan() {
        return input("threshold is NaN");
    }
    validate_points(rho.host(), points)?;
    let factor = correlation_factor(rho, points, "excursion field")?;
    let values = threshold_ensemble(&[factor], &[1.0], threshold, points.len(), n_real, rng);
    Ok(RealizationEnsemble {
        layout: Layout::Points { space: rho.host().clone(), points: points.to_vec() },
        values: Values::Binary(values),
        provenance: Provenance {
            algorithm: "excursion".into(),
            model: json!({ "correlation": rho.describe() }),
            rng,
            n_real,
            params: json!({ "threshold": threshold }),
            diagnostics: json!({}),
        },
    })
}

/// Standard Gaussian field values.
pub fn simulate_gaussian(
    rho: &GaussianCorrelation,
    points: &[Point],
    n_real: usize,
    rng: RngSpec,
) -> Result<RealizationEnsemble> {
    check_n_real(n_real)?;
    validate_points(rho.host(), points)?;
    let factor = correlation_factor(rho, points, "gaussian field")?;
    let n = points.len();
    let values = (0..n_real)
        .into_par_iter()
        .map(|i| factor.mul_vec(&standard_normals(&mut rng.realization(i).rng(), n)))
        .collect();
    Ok(RealizationEnsemble {
        layout: Layout::Points { space: rho.host().clone(), points: points.to_vec() },
        values: Values::Real(values),
        provenance: Provenance {
            algorithm: "gaussian".into(),
            model: json!({ "correlation": rho.describe() }),
            rng,
            n_real,
            params: json!({}),
            diagnostics: json!({}),
        },
    })
}

/// Product of `K ~ Poisson(rate)` independent ±1 copies; an empty product is
/// a random constant sign.
fn poisson_product(
    rate: f64,
    n: usize,
    r: &mut ChaCha8Rng,
    mut copy: impl FnMut(&mut ChaCha8Rng, &mut [i8]),
) -> Vec<i8> {
    let k = if rate > 0.0 { Poisson::new(rate).expect("positive rate").sample(r) as u64 } else { 0 };
    let mut out = vec![1i8; n];
    if k == 0 {
        let s = if r.random::<bool>() { 1 } else { -1 };
        out.iter_mut().for_each(|v| *v = s);
        return out;
    }
    let mut buf = vec![0i8; n];
    for _ in 0..k {
        copy(r, &mut buf);
        out.iter_mut().zip(&buf).for_each(|(o, b)| *o *= b);
    }
    out
}

/// ±1 field `Π_{q ≤ K} Z_q` with `K ~ Poisson(t)` and `Z_q` independent
/// median-indicator sign fields of `mix`. Its covariance is `exp(-4 t g)` for
/// the median-indicator variogram `g` of `mix`.
pub fn simulate_poisson_product(
    mix: &MixtureSpec,
    t: f64,
    points: &[Point],
    n_real: usize,
    rng: RngSpec,
) -> Result<RealizationEnsemble> {
    check_n_real(n_real)?;
    if !(t > 0.0 && t.is_finite()) {
        return input(format!("rate must be positive, got {t}"));
    }
    if (mix.total_weight() - 1.0).abs() > 1e-12 {
        return input("the product construction needs mixture weights summing to one");
    }
    validate_points(mix.host(), points)?;
    let n = points.len();
    let mut factors = Vec::new();
    let mut weights = Vec::new();
    for (j, (w, c)) in mix.atoms().iter().enumerate() {
        let MixtureComponent::Correlation(rho) = c else {
            return Err(Error::Unsupported(format!("mixture atom {j} is a variogram")));
        };
        factors.push(correlation_factor(rho, points, &format!("mixture atom {j}"))?);
        weights.push(*w);
    }
    let values = (0..n_real)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.realization(i).rng();
            let z = poisson_product(t, n, &mut r, |r, buf| {
                let u: f64 = r.random();
                let mut acc = 0.0;
                let atom = weights
                    .iter()
                    .position(|w| {
                        acc += w;
                        u < acc
                    })
                    .unwrap_or(weights.len() - 1);
                let y = factors[atom].mul_vec(&standard_normals(r, n));
                buf.iter_mut().zip(&y).for_each(|(b, &v)| *b = if v >= 0.0 { 1 } else { -1 });
            });
            z.into_iter().map(f64::from).collect()
        })
        .collect();
    Ok(RealizationEnsemble {
        layout: Layout::Points { space: mix.host().clone(), points: points.to_vec() },
        values: Values::Real(values),
        provenance: Provenance {
            algorithm: "poisson_product".into(),
            model: VariogramModel::median_indicator_mixture(mix.clone())?.describe(),
            rng,
            n_real,
            params: json!({ "t": t }),
            diagnostics: json!({}),
        },
    })
}

/// Approximate Gaussian vector with covariance `x_i · x_j` from `q` random
/// signed coordinates: `Y_i = √((N+1)/q) Σ_ℓ x_iℓ S_ℓ`, `S_ℓ` the signed count
/// of draws that chose coordinate `ℓ`.
fn clt_gaussian(coords: &[Vec<f64>], dim1: usize, q: usize, r: &mut ChaCha8Rng, counts: &mut [i64], y: &mut [f64]) {
    counts.iter_mut().for_each(|c| *c = 0);
    for _ in 0..q {
        let u: u32 = r.random();
        let sign = if u & 1 == 1 { 1 } else { -1 };
        let l = (((u >> 1) as u64 * dim1 as u64) >> 31) as usize;
        counts[l] += sign;
    }
    let scale = (dim1 as f64 / q as f64).sqrt();
    for (yi, x) in y.iter_mut().zip(coords) {
        *yi = scale * x.iter().zip(counts.iter()).map(|(a, &c)| a * c as f64).sum::<f64>();
    }
}

/// Binary field with indicator variogram `¼(1 - e^{-t d})` on the unit sphere:
/// the product of `K ~ Poisson(πt/2)` sign fields of the CLT sampler.
pub fn simulate_sphere_exponential(
    t: f64,
    host: &Space,
    points: &[Point],
    q: usize,
    n_real: usize,
    rng: RngSpec,
) -> Result<RealizationEnsemble> {
    check_n_real(n_real)?;
    let Space::Sphere { dim, radius } = host else {
        return input(format!("sphere exponential simulation needs a sphere host, got {host}"));
    };
    if (*radius - 1.0).abs() > 1e-12 {
        return input(format!("sphere exponential simulation needs the unit sphere, radius is {radius}"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return input(format!("rate must be positive, got {t}"));
    }
    if q == 0 {
        return input("Q must be at least 1");
    }
    validate_points(host, points)?;
    let dim1 = dim + 1;
    let coords: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let c = p.coords().expect("validated sphere point");
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            c.iter().map(|v| v / norm).collect()
        })
        .collect();
    let n = points.len();
    let rate = std::f64::consts::PI * t / 2.0;
    let values = (0..n_real)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.realization(i).rng();
            let mut counts = vec![0i64; dim1];
            let mut y = vec![0.0; n];
            let z = poisson_product(rate, n, &mut r, |r, buf| {
                clt_gaussian(&coords, dim1, q, r, &mut counts, &mut y);
                for (b, &v) in buf.iter_mut().zip(&y) {
                    *b = if v > 0.0 || (v == 0.0 && r.random::<bool>()) { 1 } else { -1 };
                }
            });
            z.into_iter().map(|v| u8::from(v > 0)).collect()
        })
        .collect();
    Ok(RealizationEnsemble {
        layout: Layout::Points { space: host.clone(), points: points.to_vec() },
        values: Values::Binary(values),
        provenance: Provenance {
            algorithm: "sphere_exponential".into(),
            model: json!({ "family": "sphere_exponential", "t": t, "varpi": 1.0 }),
            rng,
            n_real,
            params: json!({ "q": q, "poisson_rate": rate }),
            diagnostics: json!({}),
        },
    })
}

/// Search neighborhood of the sequential simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Neighborhood {
    pub max_data: usize,
    /// Search radius in distance units; infinite by default.
    pub radius: f64,
}

impl Default for Neighborhood {
    fn default() -> Self {
        Self { max_data: DEFAULT_MAX_DATA, radius: f64::INFINITY }
    }
}

#[derive(Default)]
struct SisCounters {
    clamped: u64,
    ridged: u64,
}

/// Sequential indicator simulation with simple kriging on a regular grid.
pub fn sequential_indicator_grid(
    model: &VariogramModel,
    grid: GridSpec,
    neighborhood: Neighborhood,
    mean: f64,
    n_real: usize,
    rng: RngSpec,
) -> Result<RealizationEnsemble> {
    check_n_real(n_real)?;
    if !(mean > 0.0 && mean < 1.0) {
        return input(format!("mean must lie in (0, 1), got {mean}"));
    }
    if neighborhood.max_data == 0 || !(neighborhood.radius > 0.0) {
        return input("neighborhood needs max_data >= 1 and a positive radius");
    }
    let Space::Euclidean { dim } = model.host() else {
        return input(format!("grid simulation needs a Euclidean model, host is {}", model.host()));
    };
    if *dim != 2 {
        return input(format!("grid simulation needs a model on R^2, host is {}", model.host()));
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let sill = mean * (1.0 - mean);
    // Covariance by (|dx|, |dy|).
    let cov: Vec<f64> = (0..ny)
        .flat_map(|dy| (0..nx).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| {
            let d = grid.spacing * ((dx * dx + dy * dy) as f64).sqrt();
            sill - model.at_lag(d, dx == 0 && dy == 0)
        })
        .collect();
    let cov_at = |a: usize, b: usize| cov[(a % nx).abs_diff(b % nx) + nx * (a / nx).abs_diff(b / nx)];
    // Offsets by increasing distance, both signs.
    let mut offsets: Vec<(i64, i64, f64)> = Vec::new();
    for dy in -(ny as i64 - 1)..=(ny as i64 - 1) {
        for dx in -(nx as i64 - 1)..=(nx as i64 - 1) {
            if dx == 0 && dy == 0 {
                continue;
            }
            let d = grid.spacing * ((dx * dx + dy * dy) as f64).sqrt();
            if d <= neighborhood.radius {
                offsets.push((dx, dy, d));
            }
        }
    }
    offsets.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.1, a.0).cmp(&(b.1, b.0))));

    let results: Vec<(Vec<u8>, SisCounters)> = (0..n_real)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.realization(i).rng();
            let mut path: Vec<usize> = (0..grid.len()).collect();
            path.shuffle(&mut r);
            let mut value = vec![0u8; grid.len()];
            let mut done = vec![false; grid.len()];
            let mut counters = SisCounters::default();
            let mut nbrs: Vec<usize> = Vec::with_capacity(neighborhood.max_data);
            for &node in &path {
                let (ix, iy) = ((node % nx) as i64, (node / nx) as i64);
                nbrs.clear();
                for &(dx, dy, _) in &offsets {
                    let (jx, jy) = (ix + dx, iy + dy);
                    if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                        continue;
                    }
                    let j = jx as usize + nx * jy as usize;
                    if done[j] {
                        nbrs.push(j);
                        if nbrs.len() == neighborhood.max_data {
                            break;
                        }
                    }
                }
                let mut p = mean;
                if !nbrs.is_empty() {
                    let k = nbrs.len();
                    let mut a = SymmetricMatrix::from_fn(k, |u, v| cov_at(nbrs[u], nbrs[v]));
                    let rhs: Vec<f64> = nbrs.iter().map(|&j| cov_at(node, j)).collect();
                    let factor = match cholesky(&a) {
                        Ok(f) => Some(f),
                        Err(_) => {
                            counters.ridged += 1;
                            for u in 0..k {
                                a.set(u, u, a.get(u, u) + KRIGING_RIDGE * sill);
                            }
                            cholesky(&a).ok().or_else(|| covariance_factor(&a).ok())
                        }
                    };
                    if let Some(f) = factor {
                        let w = f.solve(&rhs);
                        p += w.iter().zip(&nbrs).map(|(wi, &j)| wi * (value[j] as f64 - mean)).sum::<f64>();
                    }
                }
                if !(0.0..=1.0).contains(&p) {
                    counters.clamped += 1;
                    p = p.clamp(0.0, 1.0);
                }
                value[node] = u8::from(r.random::<f64>() < p);
                done[node] = true;
            }
            (value, counters)
        })
        .collect();
    let clamped: u64 = results.iter().map(|(_, c)| c.clamped).sum();
    let ridged: u64 = results.iter().map(|(_, c)| c.ridged).sum();
    let values = results.into_iter().map(|(v, _)| v).collect();
    Ok(RealizationEnsemble {
        layout: Layout::Grid(grid),
        values: Values::Binary(values),
        provenance: Provenance {
            algorithm: "sequential_indicator".into(),
            model: model.describe(),
            rng,
            n_real,
            params: json!({
                "grid": grid,
                "mean": mean,
                "max_data": neighborhood.max_data,
                "radius": if neighborhood.radius.is_finite() { json!(neighborhood.radius) } else { json!("infinite") },
                "path": "uniform random permutation",
                "kriging": "simple",
            }),
            diagnostics: json!({ "clamped_probabilities": clamped, "ridged_systems": ridged }),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excursion::{g_lambda, ExcursionMethod};
    use crate::models::{median_indicator_value, CorrelationFamily, NuggetCovariance};

    fn line() -> Space {
        Space::euclidean(1).unwrap()
    }

    fn corr(family: CorrelationFamily, scale: f64, host: Space) -> GaussianCorrelation {
        GaussianCorrelation::new(family, scale, host).unwrap()
    }

    fn pair_variogram(ens: &RealizationEnsemble, a: usize, b: usize) -> f64 {
        let n = ens.n_real();
        let differ = (0..n).filter(|&i| ens.values.value(i, a) != ens.values.value(i, b)).count();
        0.5 * differ as f64 / n as f64
    }

    fn binomial_3sigma(g: f64, n: usize) -> f64 {
        // ½ · Bernoulli(2g) averaged over n draws
        3.0 * 0.5 * (2.0 * g * (1.0 - 2.0 * g) / n as f64).sqrt()
    }

    #[test]
    fn gaussian_vector_examples() {
        let n = 100_000;
        let id = SymmetricMatrix::identity(2);
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let v = sample_gaussian_vector(&id, RngSpec::new(11).realization(i)).unwrap();
            sxy += v[0] * v[1];
            sxx += v[0] * v[0];
            syy += v[1] * v[1];
        }
        assert!((sxy / (sxx * syy).sqrt()).abs() < 0.01);
        let ones = SymmetricMatrix::from_fn(2, |_, _| 1.0);
        for i in 0..20 {
            let v = sample_gaussian_vector(&ones, RngSpec::new(3).realization(i)).unwrap();
            assert_eq!(v[0], v[1]);
        }
        assert_eq!(sample_gaussian_vector(&SymmetricMatrix::zeros(3), RngSpec::new(0)).unwrap(), vec![0.0; 3]);
        let bad = SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(sample_gaussian_vector(&bad, RngSpec::new(0)).is_err());
    }

    #[test]
    fn constant_atom_gives_constant_fields() {
        let pts: Vec<Point> = (0..4).map(|i| Point::from(vec![i as f64])).collect();
        let mix = MixtureSpec::single(corr(CorrelationFamily::Constant, 1.0, line()));
        let n = 4000;
        let ens = simulate_median_indicator(&mix, &pts, n, RngSpec::new(2)).unwrap();
        let Values::Binary(v) = &ens.values else { panic!() };
        assert!(v.iter().all(|r| r.iter().all(|&x| x == r[0])));
        let ones = v.iter().filter(|r| r[0] == 1).count() as f64 / n as f64;
        assert!((ones - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn median_indicator_exponential_pair() {
        let pts = vec![Point::from(vec![0.0]), Point::from(vec![2f64.ln()])];
        let mix = MixtureSpec::single(corr(CorrelationFamily::Exponential, 1.0, line()));
        let ens = simulate_median_indicator(&mix, &pts, 100_000, RngSpec::new(6)).unwrap();
        let g = pair_variogram(&ens, 0, 1);
        assert!((g - 1.0 / 6.0).abs() < 0.004, "{g}");
        for m in ens.point_means() {
            assert!((m - 0.5).abs() < 3.0 * (0.25 / 100_000f64).sqrt());
        }
    }

    #[test]
    fn two_atom_mixture() {
        let pts = vec![Point::from(vec![0.0]), Point::from(vec![1.0])];
        let mix = MixtureSpec::new(vec![
            (0.5, MixtureComponent::Correlation(corr(CorrelationFamily::Constant, 1.0, line()))),
            (0.5, MixtureComponent::Correlation(corr(CorrelationFamily::White, 1.0, line()))),
        ])
        .unwrap();
        let n = 100_000;
        let g = pair_variogram(&simulate_median_indicator(&mix, &pts, n, RngSpec::new(8)).unwrap(), 0, 1);
        assert!((g - 0.125).abs() < binomial_3sigma(0.125, n), "{g}");
        // Missing mass sits on the constant field.
        let half =
            MixtureSpec::new(vec![(0.5, MixtureComponent::Correlation(corr(CorrelationFamily::White, 1.0, line())))])
                .unwrap();
        let g = pair_variogram(&simulate_median_indicator(&half, &pts, n, RngSpec::new(8)).unwrap(), 0, 1);
        assert!((g - 0.125).abs() < binomial_3sigma(0.125, n), "{g}");
    }

    #[test]
    fn excursion_examples() {
        let rho = corr(CorrelationFamily::Exponential, 1.0, line());
        let pts = vec![Point::from(vec![0.0]), Point::from(vec![2f64.ln()])];
        let all = simulate_excursion(&rho, f64::NEG_INFINITY, &pts, 50, RngSpec::new(1)).unwrap();
        assert!(all.point_means().iter().all(|&m| m == 1.0));
        let zero = simulate_excursion(&rho, 0.0, &pts, 500, RngSpec::new(1)).unwrap();
        let median = simulate_median_indicator(&MixtureSpec::single(rho.clone()), &pts, 500, RngSpec::new(1)).unwrap();
        assert_eq!(zero.values, median.values);

        let n = 1_000_000;
        let ens = simulate_excursion(&rho, 2.0, &pts, n, RngSpec::new(12)).unwrap();
        let exact = g_lambda(0.5, 2.0, ExcursionMethod::Quadrature, 1e-12).unwrap();
        let g = pair_variogram(&ens, 0, 1);
        assert!((g - exact).abs() < binomial_3sigma(exact, n), "{g} vs {exact}");
        let p = crate::special::normal_sf(2.0);
        let m = ens.point_means()[0];
        assert!((m - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn clt_sampler_second_moment() {
        // E[Y_i Y_j] = (N+1)/Q · Q · (1/(N+1)) Σ x_iℓ x_jℓ for any Q.
        let coords = vec![vec![0.6, 0.8, 0.0], vec![0.0, 0.6, 0.8]];
        let mut r = RngSpec::new(5).rng();
        let (mut counts, mut y) = (vec![0i64; 3], vec![0.0; 2]);
        let n = 200_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            clt_gaussian(&coords, 3, 7, &mut r, &mut counts, &mut y);
            s += y[0] * y[1];
            s2 += (y[0] * y[1]).powi(2);
        }
        let mean = s / n as f64;
        let sd = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 0.48).abs() < 4.0 * sd, "{mean} ± {sd}");
    }

    #[test]
    fn sphere_exponential_examples() {
        let s2 = Space::sphere(2, 1.0).unwrap();
        let d: f64 = 0.1;
        // A generic rotation keeps the points off the coordinate planes, where
        // the integer counts of the sampler tie with visible probability.
        let (a, b) = (0.7f64, 1.1f64);
        let rot = |v: [f64; 3]| {
            let w = [a.cos() * v[0] - a.sin() * v[1], a.sin() * v[0] + a.cos() * v[1], v[2]];
            vec![w[0], b.cos() * w[1] - b.sin() * w[2], b.sin() * w[1] + b.cos() * w[2]]
        };
        let pts = vec![Point::from(rot([0.0, 0.0, 1.0])), Point::from(rot([d.sin(), 0.0, d.cos()]))];
        let n = 20_000;
        let ens = simulate_sphere_exponential(10.0, &s2, &pts, DEFAULT_Q, n, RngSpec::new(3)).unwrap();
        let exact = 0.25 * (1.0 - (-1.0f64).exp());
        let g = pair_variogram(&ens, 0, 1);
        assert!((g - exact).abs() < binomial_3sigma(exact, n) + 0.003, "{g} vs {exact}");
        // Tiny rate: almost always K = 0, which gives constant fields.
        let tiny = simulate_sphere_exponential(1e-6, &s2, &pts, 5, 200, RngSpec::new(3)).unwrap();
        assert_eq!(pair_variogram(&tiny, 0, 1), 0.0);
        assert!(
            simulate_sphere_exponential(1.0, &s2, &[Point::from(vec![0.0, 0.0, 2.0])], 5, 2, RngSpec::new(0)).is_err()
        );
        assert!(simulate_sphere_exponential(1.0, &line(), &pts, 5, 2, RngSpec::new(0)).is_err());
    }

    #[test]
    fn poisson_product_covariance() {
        let rho = corr(CorrelationFamily::Exponential, 1.0, line());
        let pts = vec![Point::from(vec![0.0]), Point::from(vec![0.7])];
        let t = 0.8;
        let n = 100_000;
        let ens = simulate_poisson_product(&MixtureSpec::single(rho.clone()), t, &pts, n, RngSpec::new(9)).unwrap();
        let g = median_indicator_value((-0.7f64).exp()).unwrap();
        let c = (-4.0 * t * g).exp();
        let est: f64 = (0..n).map(|i| ens.values.value(i, 0) * ens.values.value(i, 1)).sum::<f64>() / n as f64;
        assert!((est - c).abs() < 3.0 * ((1.0 - c * c) / n as f64).sqrt(), "{est} vs {c}");
    }

    #[test]
    fn sis_limits() {
        let plane = Space::euclidean(2).unwrap();
        let grid = GridSpec::new(15, 10, 1.0).unwrap();
        let flat = VariogramModel::nugget(NuggetCovariance::Constant(1.0), 1.0, plane.clone()).unwrap();
        let ens = sequential_indicator_grid(&flat, grid, Neighborhood::default(), 0.5, 6, RngSpec::new(1)).unwrap();
        let Values::Binary(v) = &ens.values else { panic!() };
        assert!(v.iter().all(|r| r.iter().all(|&x| x == r[0])));

        let nugget = VariogramModel::nugget(NuggetCovariance::Constant(0.0), 1.0, plane).unwrap();
        let grid = GridSpec::new(30, 30, 1.0).unwrap();
        let n_real = 10;
        let ens =
            sequential_indicator_grid(&nugget, grid, Neighborhood::default(), 0.3, n_real, RngSpec::new(2)).unwrap();
        let mean: f64 = ens.realization_means().iter().sum::<f64>() / n_real as f64;
        assert!((mean - 0.3).abs() < 3.0 * (0.21 / 9000.0f64).sqrt(), "{mean}");
        let bins = crate::estimate::LagBins::regular(crate::estimate::Direction::Axis(0), 1.0, 5).unwrap();
        let curve = crate::estimate::experimental_variogram(&ens, &bins, 2.0).unwrap();
        for p in &curve.ensemble {
            assert!((p.estimate - 0.21).abs() < 0.02, "{p:?}");
        }
    }

    #[test]
    fn ensembles_do_not_depend_on_thread_count() {
        let plane = Space::euclidean(2).unwrap();
        let model = VariogramModel::exponential(0.2, 1.0, plane).unwrap();
        let grid = GridSpec::new(12, 9, 1.0).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                sequential_indicator_grid(&model, grid, Neighborhood::default(), 0.5, 5, RngSpec::new(42))
                    .unwrap()
                    .values
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn grid_cap() {
        assert!(GridSpec::new(1001, 1000, 1.0).is_err());
        assert!(GridSpec::with_cap(10, 10, 1.0, 99).is_err());
        assert!(GridSpec::new(120, 80, 1.0).is_ok());
    }
}
