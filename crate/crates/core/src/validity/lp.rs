//! Exact small-n realizability: is there a distribution over sign vectors
//! `ε ∈ {-1,1}ⁿ` with `E[ε_k ε_l] = 1 - 4 g_kl`?

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

pub const MAX_POINTS: usize = 10;
pub const FEASIBILITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

/// One atom of a feasible distribution.
#[derive(Clone, Debug, Serialize)]
pub struct Atom {
    pub signs: Vec<i8>,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Realizability {
    Feasible {
        atoms: Vec<Atom>,
        /// Largest absolute moment mismatch of the returned atoms.
        moment_error: f64,
    },
    Infeasible {
        /// Corner-positive matrix with `⟨M, 1 - 4g⟩ < 0`.
        matrix: Vec<Vec<f64>>,
        /// `⟨M, 1 - 4g⟩`, negative.
        value: f64,
        /// `min ⟨M, εεᵀ⟩` over all sign vectors, non-negative.
        min_corner: f64,
    },
}

/// Sign vector of atom `j` with the first sign fixed to +1.
fn atom_signs(j: usize, n: usize) -> Vec<i8> {
    (0..n).map(|k| if k == 0 || (j >> (k - 1)) & 1 == 0 { 1 } else { -1 }).collect()
}

pub fn realizability(g: &SymmetricMatrix) -> Result<Realizability> {
    let n = g.n();
    if n > MAX_POINTS {
        return Err(Error::Unsupported(format!(
            "exact realizability is limited to {MAX_POINTS} points (got {n}); use the inequality families instead"
        )));
    }
    if n < 2 {
        return Err(Error::Input("realizability needs at least 2 points".into()));
    }
    let n_atoms = 1usize << (n - 1);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))).collect();
    let m = pairs.len() + 1;
    let atoms: Vec<Vec<i8>> = (0..n_atoms).map(|j| atom_signs(j, n)).collect();

    // Rows: moment equation per pair, then the sum-to-one row.
    let mut a = vec![vec![0.0; n_atoms]; m];
    let mut b = vec![0.0; m];
    for (r, &(k, l)) in pairs.iter().enumerate() {
        for (j, s) in atoms.iter().enumerate() {
            a[r][j] = (s[k] * s[l]) as f64;
        }
        b[r] = 1.0 - 4.0 * g.get(k, l);
    }
    a[m - 1].iter_mut().for_each(|v| *v = 1.0);
    b[m - 1] = 1.0;
    let flip: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    for r in 0..m {
        if flip[r] < 0.0 {
            a[r].iter_mut().for_each(|v| *v = -*v);
            b[r] = -b[r];
        }
    }

    let phase = phase_one(&a, &b, n_atoms)?;
    if phase.objective <= FEASIBILITY_TOL {
        let mut weights = vec![0.0; n_atoms];
        for (r, &var) in phase.basis.iter().enumerate() {
            if var < n_atoms {
                weights[var] = phase.rhs[r].max(0.0);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mut moment_error: f64 = 0.0;
        for &(k, l) in &pairs {
            let m: f64 = atoms.iter().zip(&weights).map(|(s, w)| w * (s[k] * s[l]) as f64).sum();
            moment_error = moment_error.max((m - (1.0 - 4.0 * g.get(k, l))).abs());
        }
        let atoms = atoms
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|(signs, weight)| Atom { signs, weight })
            .collect();
        return Ok(Realizability::Feasible { atoms, moment_error });
    }

    // Dual of the original rows: y_r = flip_r (1 - reduced cost of artificial r).
    let y: Vec<f64> = (0..m).map(|r| flip[r] * (1.0 - phase.reduced_costs[n_atoms + r])).collect();
    let mut mat = vec![vec![0.0; n]; n];
    for (r, &(k, l)) in pairs.iter().enumerate() {
        mat[k][l] = -y[r] / 2.0;
        mat[l][k] = -y[r] / 2.0;
    }
    for (k, row) in mat.iter_mut().enumerate() {
        row[k] = -y[m - 1] / n as f64;
    }
    let corner_min = |mat: &[Vec<f64>]| -> f64 {
        (0..n_atoms)
            .map(|j| {
                let s = atom_signs(j, n);
                let mut v = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        v += mat[k][l] * (s[k] * s[l]) as f64;
                    }
                }
                v
            })
            .fold(f64::INFINITY, f64::min)
    };
    let pairing = |mat: &[Vec<f64>]| -> f64 {
        let mut v = 0.0;
        for k in 0..n {
            for l in 0..n {
                let c = if k == l { 1.0 } else { 1.0 - 4.0 * g.get(k, l) };
                v += mat[k][l] * c;
            }
        }
        v
    };
    let shift = corner_min(&mat);
    if shift < 0.0 {
        for (k, row) in mat.iter_mut().enumerate() {
            row[k] -= shift / n as f64;
        }
    }
    let scale = mat.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale > 0.0 {
        mat.iter_mut().flatten().for_each(|v| *v /= scale);
    }
    let value = pairing(&mat);
    let min_corner = corner_min(&mat);
    if !(value < 0.0) || min_corner < -1e-12 {
        return Err(Error::Numerical(format!(
            "phase-1 objective {} indicates infeasibility but the dual certificate did not verify \
             (pairing {value}, corner minimum {min_corner})",
            phase.objective
        )));
    }
    Ok(Realizability::Infeasible { matrix: mat, value, min_corner: min_corner.max(0.0) })
}

struct PhaseOne {
    objective: f64,
    basis: Vec<usize>,
    rhs: Vec<f64>,
    /// Reduced costs of all columns (structural, then artificial).
    reduced_costs: Vec<f64>,
}

/// Minimizes the sum of artificials for `A p = b, p ≥ 0` (with `b ≥ 0`),
/// dense tableau, Bland's rule.
fn phase_one(a: &[Vec<f64>], b: &[f64], n_struct: usize) -> Result<PhaseOne> {
    let m = a.len();
    let cols = n_struct + m;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|r| {
            let mut row = a[r].clone();
            row.extend((0..m).map(|i| if i == r { 1.0 } else { 0.0 }));
            row.push(b[r]);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n_struct..cols).collect();
    // Reduced-cost row: c_j - Σ_r c_B(r) t[r][j], with c = 1 on artificials.
    let mut cost = vec![0.0; cols + 1];
    for j in 0..=cols {
        let c = if j >= n_struct && j < cols { 1.0 } else { 0.0 };
        cost[j] = c - (0..m).map(|r| t[r][j]).sum::<f64>();
    }
    let max_iter = 50 * (cols + m) + 10_000;
    for _ in 0..max_iter {
        let Some(enter) = (0..cols).find(|&j| cost[j] < -FEASIBILITY_TOL * 1e-3) else {
            let objective = -cost[cols];
            let rhs = t.iter().map(|row| row[cols]).collect();
            cost.truncate(cols);
            return Ok(PhaseOne { objective, basis, rhs, reduced_costs: cost });
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            if t[r][enter] > PIVOT_TOL {
                let ratio = t[r][cols] / t[r][enter];
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-14 || (ratio <= lratio + 1e-14 && basis[r] < basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        let Some((pr, _)) = leave else {
            return Err(Error::Numerical("phase-1 problem reported unbounded".into()));
        };
        let piv = t[pr][enter];
        t[pr].iter_mut().for_each(|v| *v /= piv);
        let pivot_row = t[pr].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r != pr {
                let f = row[enter];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
        let f = cost[enter];
        cost.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
        basis[pr] = enter;
    }
    Err(Error::Numerical(format!("phase-1 simplex exceeded {max_iter} iterations")))
}
