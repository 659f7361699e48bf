//! Dense symmetric matrices, symmetric eigendecomposition and Cholesky
//! factorizations used across the crate.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense symmetric matrix stored as its packed lower triangle.
///
/// Symmetry holds by representation: `get(k, l)` and `get(l, k)` read the
/// same slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn packed(r: usize, c: usize) -> usize {
    let (i, j) = if r >= c { (r, c) } else { (c, r) };
    i * (i + 1) / 2 + j
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m.set(k, k, 1.0);
        }
        m
    }

    /// Builds the matrix from `f(k, l)` evaluated on the lower triangle `l <= k`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for k in 0..n {
            for l in 0..=k {
                data.push(f(k, l));
            }
        }
        Self { n, data }
    }

    /// Builds from full rows, rejecting non-square or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("matrix rows must all have length n".into()));
        }
        for k in 0..n {
            for l in 0..k {
                let (a, b) = (rows[k][l], rows[l][k]);
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::Input(format!("matrix is not symmetric at ({k}, {l}): {a} vs {b}")));
                }
            }
        }
        Ok(Self::from_fn(n, |k, l| rows[k][l]))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.data[packed(k, l)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, l: usize, v: f64) {
        self.data[packed(k, l)] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|k| self.get(k, k)).sum()
    }

    /// `Σ_k Σ_l w_k w_l a_kl`.
    pub fn quad_form(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.n);
        let mut acc = 0.0;
        for k in 0..self.n {
            acc += w[k] * w[k] * self.get(k, k);
            for l in 0..k {
                acc += 2.0 * w[k] * w[l] * self.get(k, l);
            }
        }
        acc
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|k| (0..self.n).map(|l| self.get(k, l)).collect()).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |k, l| self.get(k, l))
    }

    /// Eigenvalues in ascending order with matching unit eigenvectors.
    pub fn eigen(&self) -> Eigen {
        if self.n == 0 {
            return Eigen { values: vec![], vectors: vec![] };
        }
        let se = SymmetricEigen::new(self.to_dmatrix());
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        Eigen {
            values: order.iter().map(|&i| se.eigenvalues[i]).collect(),
            vectors: order.iter().map(|&i| se.eigenvectors.column(i).iter().copied().collect()).collect(),
        }
    }

    /// Applies `f` to the spectrum: `V diag(f(μ)) Vᵀ`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = self.eigen();
        let fv: Vec<f64> = e.values.iter().map(|&m| f(m)).collect();
        Self::from_fn(self.n, |k, l| e.vectors.iter().zip(&fv).map(|(v, &m)| m * v[k] * v[l]).sum())
    }
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// Ascending eigenvalues and the corresponding eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Factor `L` of `A ≈ L Lᵀ`, dense row-major lower triangle.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    /// Diagonal shift that was added before the factorization succeeded.
    pub ridge: f64,
}

/// First leading minor at which the factorization broke down.
#[derive(Clone, Copy, Debug)]
pub struct CholeskyBreakdown {
    pub minor: usize,
    pub pivot: f64,
}

impl Cholesky {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn l(&self, r: usize, c: usize) -> f64 {
        self.l[r * self.n + c]
    }

    /// `L w`.
    pub fn mul_vec(&self, w: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|r| {
                let row = &self.l[r * n..r * n + r + 1];
                row.iter().zip(w).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Solves `L Lᵀ x = b`. Only meaningful for strictly positive pivots.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for r in 0..n {
            let mut s = y[r];
            for c in 0..r {
                s -= self.l[r * n + c] * y[c];
            }
            y[r] = s / self.l[r * n + r];
        }
        for r in (0..n).rev() {
            let mut s = y[r];
            for c in r + 1..n {
                s -= self.l[c * n + r] * y[c];
            }
            y[r] = s / self.l[r * n + r];
        }
        y
    }
}

fn factor(a: &SymmetricMatrix, ridge: f64, semidefinite: bool) -> std::result::Result<Cholesky, CholeskyBreakdown> {
    let n = a.n();
    let scale = (0..n).fold(0.0f64, |m, k| m.max(a.get(k, k).abs()));
    let zero_tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a.get(j, j) + ridge;
        for c in 0..j {
            d -= l[j * n + c] * l[j * n + c];
        }
        if d > zero_tol {
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for r in j + 1..n {
                let mut s = a.get(r, j);
                for c in 0..j {
                    s -= l[r * n + c] * l[j * n + c];
                }
                l[r * n + j] = s / ljj;
            }
        } else if semidefinite && d >= -zero_tol {
            // Zero pivot: the column is linearly dependent on earlier ones and
            // stays zero. The remaining off-diagonals must be consistent.
            for r in j + 1..n {
                let mut s = a.get(r, j);
                for c in 0..j {
                    s -= l[r * n + c] * l[j * n + c];
                }
                if s.abs() > 1e-7 * scale.max(f64::MIN_POSITIVE) {
                    return Err(CholeskyBreakdown { minor: j + 1, pivot: d });
                }
            }
        } else {
            return Err(CholeskyBreakdown { minor: j + 1, pivot: d });
        }
    }
    Ok(Cholesky { n, l, ridge })
}

/// Positive-definite Cholesky factorization. Fails on any non-positive pivot.
pub fn cholesky(a: &SymmetricMatrix) -> std::result::Result<Cholesky, CholeskyBreakdown> {
    factor(a, 0.0, false)
}

/// Cholesky factorization for covariance matrices that may be singular.
///
/// Zero pivots (rank deficiency) are accepted exactly. If a pivot is clearly
/// negative, a ridge of `1e-10·trace/n` is added and multiplied by ten on
/// each retry up to `1e-6·trace/n`.
pub fn covariance_factor(cov: &SymmetricMatrix) -> Result<Cholesky> {
    let n = cov.n();
    if (0..n).any(|k| cov.get(k, k) < 0.0) {
        return Err(Error::Input("covariance has a negative diagonal entry".into()));
    }
    let mut last = match factor(cov, 0.0, true) {
        Ok(c) => return Ok(c),
        Err(b) => b,
    };
    let base = if n == 0 { 0.0 } else { cov.trace() / n as f64 };
    let mut ridge = 1e-10 * base;
    while ridge <= 1e-6 * base * (1.0 + 1e-9) && ridge > 0.0 {
        match factor(cov, ridge, true) {
            Ok(c) => return Ok(c),
            Err(b) => last = b,
        }
        ridge *= 10.0;
    }
    Err(Error::Numerical(format!(
        "Cholesky factorization failed at leading minor {} (pivot {:.3e}) after ridge escalation",
        last.minor, last.pivot
    )))
}
