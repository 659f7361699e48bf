//! Exhaustive sweeps over integer weight vectors.
//!
//! The quadratic form `Q(λ) = λᵀ G λ` is updated incrementally as an odometer
//! walks the candidates in lexicographic order. Work is split by the value of
//! the first coordinate, so the arithmetic done for each candidate does not
//! depend on the number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_CANDIDATES: u64 = 100_000_000;
pub const MAX_GAP_LEN: usize = 24;
/// Margins closer than this are ties, resolved towards the
/// lexicographically smaller weight vector.
const TIE_TOL: f64 = 1e-12;

/// The families of integer-weight inequalities `λᵀ G λ ≤ rhs(λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    /// `λ ∈ {-1,0,1}ⁿ`, `σ ∈ {-1,0,1}`, rhs 0
    Polygonal,
    /// `λ ∈ {-1,0,1}ⁿ`, `σ = 1`, rhs 0
    Matheron,
    /// `λ ∈ {-1,0,1}ⁿ`, `σ` odd, rhs `(σ²-1)/4`
    OddClique,
    /// `λ ∈ {-1,1}ⁿ`, `n` odd, rhs `(σ²-1)/4`
    Shepp,
    /// `λ ∈ ℤⁿ`, `σ = 1`, rhs 0
    Hypermetric,
    /// `λ ∈ ℤⁿ`, rhs `σ²/4`
    Psd,
    /// `λ ∈ ℤⁿ`, `σ` odd, rhs `⌊σ²/4⌋`
    RoundedPsd,
    /// `λ ∈ ℤⁿ`, rhs `(σ² - gap²)/4`
    Gap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueSet {
    Signs,
    Ternary,
    Bounded,
}

impl WeightFamily {
    pub fn name(self) -> &'static str {
        match self {
            WeightFamily::Polygonal => "polygonal",
            WeightFamily::Matheron => "matheron",
            WeightFamily::OddClique => "odd_clique",
            WeightFamily::Shepp => "shepp",
            WeightFamily::Hypermetric => "hypermetric",
            WeightFamily::Psd => "psd",
            WeightFamily::RoundedPsd => "rounded_psd",
            WeightFamily::Gap => "gap",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "polygonal" => WeightFamily::Polygonal,
            "matheron" => WeightFamily::Matheron,
            "odd_clique" => WeightFamily::OddClique,
            "shepp" => WeightFamily::Shepp,
            "hypermetric" => WeightFamily::Hypermetric,
            "psd" => WeightFamily::Psd,
            "rounded_psd" => WeightFamily::RoundedPsd,
            "gap" => WeightFamily::Gap,
            _ => return None,
        })
    }

    pub fn value_set(self) -> ValueSet {
        match self {
            WeightFamily::Shepp => ValueSet::Signs,
            WeightFamily::Polygonal | WeightFamily::Matheron | WeightFamily::OddClique => ValueSet::Ternary,
            _ => ValueSet::Bounded,
        }
    }

    /// Whether `λ` (summarized by `σ`, its largest magnitude and whether it has
    /// zero entries) belongs to the family.
    pub fn admits(self, sigma: i64, max_abs: i64, has_zero: bool) -> bool {
        let odd = sigma.rem_euclid(2) == 1;
        match self {
            WeightFamily::Polygonal => max_abs <= 1 && sigma.abs() <= 1,
            WeightFamily::Matheron => max_abs <= 1 && sigma == 1,
            WeightFamily::OddClique => max_abs <= 1 && odd,
            WeightFamily::Shepp => max_abs == 1 && !has_zero,
            WeightFamily::Hypermetric => sigma == 1,
            WeightFamily::Psd | WeightFamily::Gap => true,
            WeightFamily::RoundedPsd => odd,
        }
    }

    /// Right-hand side; `gap` is only consulted by [`WeightFamily::Gap`].
    pub fn rhs(self, sigma: i64, gap: i64) -> f64 {
        let s2 = sigma * sigma;
        match self {
            WeightFamily::Polygonal | WeightFamily::Matheron | WeightFamily::Hypermetric => 0.0,
            WeightFamily::OddClique | WeightFamily::Shepp => (s2 - 1) as f64 / 4.0,
            WeightFamily::Psd => s2 as f64 / 4.0,
            WeightFamily::RoundedPsd => (s2 / 4) as f64,
            WeightFamily::Gap => (s2 - gap * gap) as f64 / 4.0,
        }
    }
}

/// `min |λ·z|` over sign vectors `z`, by brute force with `z₀ = 1`.
pub fn gap(lambda: &[i64]) -> Result<i64> {
    if lambda.len() > MAX_GAP_LEN {
        return Err(Error::Unsupported(format!(
            "gap of a weight vector of length {} (limit {MAX_GAP_LEN}) is NP-hard to compute; \
             use the rounded_psd family instead",
            lambda.len()
        )));
    }
    if lambda.is_empty() {
        return Ok(0);
    }
    let n = lambda.len();
    let mut best = i64::MAX;
    for mask in 0u64..(1u64 << (n - 1)) {
        let mut s = lambda[0];
        for (i, &l) in lambda.iter().enumerate().skip(1) {
            if mask >> (i - 1) & 1 == 1 {
                s -= l;
            } else {
                s += l;
            }
        }
        best = best.min(s.abs());
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

/// Gap by subset sums over `|λ_i|`: `min |T - 2S|` over subset sums `S`.
fn gap_fast(lambda: &[i64]) -> i64 {
    let total: i64 = lambda.iter().map(|l| l.abs()).sum();
    if total < 128 {
        let mut reach: u128 = 1;
        for &l in lambda {
            reach |= reach << l.unsigned_abs();
        }
        let mut best = i64::MAX;
        for s in 0..=total {
            if reach >> s & 1 == 1 {
                best = best.min((total - 2 * s).abs());
            }
        }
        best
    } else {
        gap(lambda).unwrap_or(0)
    }
}

/// Worst candidate of one family after a sweep.
#[derive(Clone, Debug)]
pub struct FamilyOutcome {
    pub family: WeightFamily,
    /// Largest `λᵀGλ - rhs(λ)` seen, recomputed exactly for the reported λ.
    pub margin: Option<f64>,
    pub lambda: Option<Vec<i64>>,
    pub checked: u64,
}

#[derive(Clone)]
struct Best {
    margin: f64,
    lambda: Vec<i64>,
}

fn better(candidate: f64, current: &Option<Best>) -> bool {
    match current {
        None => true,
        Some(b) => candidate > b.margin + TIE_TOL,
    }
}

fn merge(into: &mut Option<Best>, other: Option<Best>) {
    if let Some(o) = other {
        if better(o.margin, into) {
            *into = Some(o);
        }
    }
}

/// `λᵀ G λ` from scratch.
pub fn quad_form(g: &[f64], n: usize, lambda: &[i64]) -> f64 {
    let mut q = 0.0;
    for k in 0..n {
        if lambda[k] == 0 {
            continue;
        }
        let mut row = 0.0;
        for l in 0..n {
            row += g[k * n + l] * lambda[l] as f64;
        }
        q += lambda[k] as f64 * row;
    }
    q
}

pub fn candidate_count(values: usize, n: usize) -> Option<u64> {
    (values as u64).checked_pow(n as u32)
}

/// Sweeps every `λ ∈ valuesⁿ` and returns the worst candidate of each family.
/// `values` must be sorted ascending.
pub fn sweep(g: &[f64], n: usize, values: &[i64], families: &[WeightFamily]) -> Vec<FamilyOutcome> {
    let need_gap = families.contains(&WeightFamily::Gap);
    let chunks: Vec<(Vec<Option<Best>>, Vec<u64>)> =
        values.par_iter().map(|&first| sweep_chunk(g, n, values, first, families, need_gap)).collect();
    let mut best: Vec<Option<Best>> = vec![None; families.len()];
    let mut checked = vec![0u64; families.len()];
    for (b, c) in chunks {
        for (i, item) in b.into_iter().enumerate() {
            merge(&mut best[i], item);
            checked[i] += c[i];
        }
    }
    families
        .iter()
        .zip(best)
        .zip(checked)
        .map(|((&family, b), checked)| match b {
            Some(b) => {
                let sigma: i64 = b.lambda.iter().sum();
                let gp = if family == WeightFamily::Gap { gap_fast(&b.lambda) } else { 0 };
                let margin = quad_form(g, n, &b.lambda) - family.rhs(sigma, gp);
                FamilyOutcome { family, margin: Some(margin), lambda: Some(b.lambda), checked }
            }
            None => FamilyOutcome { family, margin: None, lambda: None, checked },
        })
        .collect()
}

fn sweep_chunk(
    g: &[f64],
    n: usize,
    values: &[i64],
    first: i64,
    families: &[WeightFamily],
    need_gap: bool,
) -> (Vec<Option<Best>>, Vec<u64>) {
    let mut best: Vec<Option<Best>> = vec![None; families.len()];
    let mut checked = vec![0u64; families.len()];
    let mut idx = vec![0usize; n];
    let mut lambda = vec![values[0]; n];
    lambda[0] = first;
    let mut h: Vec<f64> = (0..n).map(|k| (0..n).map(|l| g[k * n + l] * lambda[l] as f64).sum()).collect();
    let mut q: f64 = (0..n).map(|k| lambda[k] as f64 * h[k]).sum();
    let mut sigma: i64 = lambda.iter().sum();
    let mut zeros = lambda.iter().filter(|&&v| v == 0).count();
    let mut big = lambda.iter().filter(|&&v| v.abs() > 1).count();
    let mut nonzero = n - zeros;

    let apply = |j: usize,
                 new: i64,
                 lambda: &mut [i64],
                 h: &mut [f64],
                 q: &mut f64,
                 sigma: &mut i64,
                 zeros: &mut usize,
                 big: &mut usize,
                 nonzero: &mut usize| {
        let old = lambda[j];
        let delta = (new - old) as f64;
        *q += 2.0 * delta * h[j] + delta * delta * g[j * n + j];
        for (i, hi) in h.iter_mut().enumerate() {
            *hi += delta * g[i * n + j];
        }
        *sigma += new - old;
        if old == 0 {
            *zeros -= 1;
            *nonzero += 1;
        }
        if new == 0 {
            *zeros += 1;
            *nonzero -= 1;
        }
        if old.abs() > 1 {
            *big -= 1;
        }
        if new.abs() > 1 {
            *big += 1;
        }
        lambda[j] = new;
    };

    loop {
        if nonzero > 0 {
            let max_abs = if big > 0 { 2 } else { 1 };
            let mut gap_value = None;
            for (i, &fam) in families.iter().enumerate() {
                if !fam.admits(sigma, max_abs, zeros > 0) {
                    continue;
                }
                checked[i] += 1;
                let gp = if fam == WeightFamily::Gap && need_gap {
                    *gap_value.get_or_insert_with(|| gap_fast(&lambda))
                } else {
                    0
                };
                let margin = q - fam.rhs(sigma, gp);
                if better(margin, &best[i]) {
                    best[i] = Some(Best { margin, lambda: lambda.clone() });
                }
            }
        }
        // advance the odometer over coordinates 1..n
        let mut j = n;
        loop {
            if j == 1 || n == 1 {
                return (best, checked);
            }
            j -= 1;
            if idx[j] + 1 < values.len() {
                idx[j] += 1;
                apply(j, values[idx[j]], &mut lambda, &mut h, &mut q, &mut sigma, &mut zeros, &mut big, &mut nonzero);
                break;
            }
            idx[j] = 0;
            apply(j, values[0], &mut lambda, &mut h, &mut q, &mut sigma, &mut zeros, &mut big, &mut nonzero);
        }
    }
}
