//! Validity checks for a candidate indicator variogram on a finite
//! configuration: negative type, pointwise bounds, the integer-weight
//! inequality families and exact small-n realizability.

mod enumerate;
mod lp;

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{input, Result};
use crate::linalg::SymmetricMatrix;
use crate::models::VariogramModel;
use crate::rng::RngSpec;
use crate::spaces::{Point, Space};

pub use enumerate::{candidate_count, gap, quad_form, WeightFamily, MAX_CANDIDATES, MAX_GAP_LEN};
pub use lp::{realizability as realizability_small, Atom, Realizability, MAX_POINTS as MAX_REALIZABILITY_POINTS};

/// Absolute tolerance on inequality slack.
pub const SLACK_TOL: f64 = 1e-9;
/// Relative eigenvalue tolerance of the negative-type test.
pub const EIGEN_TOL: f64 = 1e-9;
pub const DEFAULT_BOUND: i64 = 3;
pub const POLYGONAL_EXACT_MAX: usize = 12;
pub const POLYGONAL_SAMPLES: usize = 10_000;

/// Values of a candidate `g` at every pair of a point configuration.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub space: Option<Space>,
    pub points: Vec<Point>,
    pub g: SymmetricMatrix,
}

impl Configuration {
    /// A bare matrix with no host space attached.
    pub fn from_matrix(g: SymmetricMatrix) -> Result<Self> {
        let n = g.n();
        if n < 2 {
            return input(format!("a configuration needs at least 2 points, got {n}"));
        }
        for k in 0..n {
            if g.get(k, k) != 0.0 {
                return input(format!("diagonal entry {k} is {} (must be 0)", g.get(k, k)));
            }
            for l in 0..k {
                let v = g.get(k, l);
                if !v.is_finite() || v < 0.0 {
                    return input(format!("entry ({k}, {l}) is {v} (must be finite and non-negative)"));
                }
            }
        }
        Ok(Configuration { space: None, points: Vec::new(), g })
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    fn dense(&self) -> Vec<f64> {
        let n = self.n();
        (0..n * n).map(|i| self.g.get(i / n, i % n)).collect()
    }
}

/// Evaluates `model` at every pair of `points`.
pub fn gamma_matrix(model: &VariogramModel, points: &[Point]) -> Result<Configuration> {
    for p in points {
        model.host().validate_point(p)?;
    }
    let n = points.len();
    let mut g = SymmetricMatrix::zeros(n);
    for k in 0..n {
        for l in 0..k {
            g.set(k, l, model.eval(&points[k], &points[l])?);
        }
    }
    let mut cfg = Configuration::from_matrix(g)?;
    cfg.space = Some(model.host().clone());
    cfg.points = points.to_vec();
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    PassSampled,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::PassSampled => "pass (sampled)",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        }
    }

    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::PassSampled)
    }
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// Evidence for a verdict, re-checkable from the configuration alone.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Integer weights with `λᵀGλ - rhs > 0`.
    Weights { lambda: Vec<i64>, sigma: i64, rhs: f64 },
    /// Real zero-sum weights with `λᵀGλ > 0`.
    RealWeights { lambda: Vec<f64> },
    /// An entry outside `[0, ½]` or a nonzero diagonal.
    Entry { k: usize, l: usize, value: f64 },
    /// Corner-positive matrix `M` with `⟨M, 1 - 4g⟩ < 0`.
    CornerPositive { matrix: Vec<Vec<f64>>, value: f64 },
}

impl Certificate {
    /// Violation margin recomputed from scratch (positive means violated).
    pub fn margin(&self, g: &SymmetricMatrix) -> f64 {
        match self {
            Certificate::Weights { lambda, rhs, .. } => {
                let w: Vec<f64> = lambda.iter().map(|&v| v as f64).collect();
                g.quad_form(&w) - rhs
            }
            Certificate::RealWeights { lambda } => g.quad_form(lambda),
            Certificate::Entry { k, l, .. } => entry_violation(*k, *l, g.get(*k, *l)),
            Certificate::CornerPositive { matrix, .. } => {
                let n = g.n();
                let mut v = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        let c = if k == l { 1.0 } else { 1.0 - 4.0 * g.get(k, l) };
                        v += matrix[k][l] * c;
                    }
                }
                -v
            }
        }
    }
}

fn entry_violation(k: usize, l: usize, v: f64) -> f64 {
    if k == l {
        v.abs()
    } else {
        (v - 0.5).max(-v)
    }
}

/// What was enumerated, so a pass is read as certified only up to it.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Bounds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_bound: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub check: String,
    pub verdict: Verdict,
    /// Worst `LHS - RHS` found; positive means violated.
    pub margin: Option<f64>,
    pub certificate: Option<Certificate>,
    pub bounds: Bounds,
}

impl CheckEntry {
    fn skipped(check: &str, reason: String) -> Self {
        CheckEntry {
            check: check.into(),
            verdict: Verdict::Skipped,
            margin: None,
            certificate: None,
            bounds: Bounds { note: Some(reason), ..Bounds::default() },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    /// No check failed (skipped checks do not count against).
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdict != Verdict::Fail)
    }

    pub fn get(&self, check: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.check == check)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<16} {:<15} {:>14}  {}\n", "check", "verdict", "margin", "detail");
        for e in &self.entries {
            let margin = e.margin.map_or("-".to_string(), |m| format!("{m:.6e}"));
            let detail = match &e.certificate {
                Some(Certificate::Weights { lambda, .. }) => format!("lambda = {lambda:?}"),
                Some(Certificate::RealWeights { lambda }) => {
                    let short: Vec<String> = lambda.iter().map(|v| format!("{v:.3}")).collect();
                    format!("lambda = [{}]", short.join(", "))
                }
                Some(Certificate::Entry { k, l, value }) => format!("g({k},{l}) = {value}"),
                Some(Certificate::CornerPositive { value, .. }) => format!("<M, 1-4g> = {value:.6e}"),
                None => {
                    let mut s = String::new();
                    if let Some(b) = e.bounds.weight_bound {
                        let _ = write!(s, "|lambda| <= {b} ");
                    }
                    if let Some(c) = e.bounds.candidates {
                        let _ = write!(s, "({c} candidates) ");
                    }
                    if let Some(n) = &e.bounds.note {
                        s.push_str(n);
                    }
                    s
                }
            };
            let _ = writeln!(out, "{:<16} {:<15} {:>14}  {}", e.check, e.verdict.label(), margin, detail.trim_end());
        }
        out
    }
}

/// `-JgJ ⪰ 0`, i.e. `λᵀgλ ≤ 0` for every real zero-sum `λ`.
pub fn check_negative_type(cfg: &Configuration) -> CheckEntry {
    let n = cfg.n();
    // Orthonormal basis of the zero-sum subspace (Helmert columns).
    let basis: Vec<Vec<f64>> = (1..n)
        .map(|j| {
            let c = 1.0 / ((j * (j + 1)) as f64).sqrt();
            (0..n)
                .map(|i| match i.cmp(&j) {
                    std::cmp::Ordering::Less => c,
                    std::cmp::Ordering::Equal => -(j as f64) * c,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect();
    let reduced = SymmetricMatrix::from_fn(n - 1, |a, b| {
        let mut v = 0.0;
        for k in 0..n {
            if basis[a][k] == 0.0 {
                continue;
            }
            for l in 0..n {
                v += basis[a][k] * cfg.g.get(k, l) * basis[b][l];
            }
        }
        v
    });
    let eig = reduced.eigen();
    let top = n - 2;
    let w = &eig.vectors[top];
    let mut lambda: Vec<f64> = (0..n).map(|k| (0..n - 1).map(|a| w[a] * basis[a][k]).sum()).collect();
    let mean = lambda.iter().sum::<f64>() / n as f64;
    lambda.iter_mut().for_each(|v| *v -= mean);
    let margin = cfg.g.quad_form(&lambda);
    let tol = EIGEN_TOL * cfg.g.max_abs();
    let fail = margin > tol;
    CheckEntry {
        check: "negative_type".into(),
        verdict: if fail { Verdict::Fail } else { Verdict::Pass },
        margin: Some(margin),
        certificate: fail.then_some(Certificate::RealWeights { lambda }),
        bounds: Bounds { note: Some(format!("relative eigenvalue tolerance {EIGEN_TOL:e}")), ..Bounds::default() },
    }
}

/// `0 ≤ g ≤ ½` entrywise with an exactly zero diagonal.
pub fn check_pointwise(cfg: &Configuration) -> CheckEntry {
    let n = cfg.n();
    let mut worst: Option<(usize, usize, f64, f64)> = None;
    for k in 0..n {
        for l in 0..=k {
            let v = cfg.g.get(k, l);
            let m = entry_violation(k, l, v);
            if worst.is_none_or(|w| m > w.3) {
                worst = Some((k, l, v, m));
            }
        }
    }
    let (k, l, value, margin) = worst.expect("n >= 2");
    let fail = if k == l { margin > 0.0 } else { margin > SLACK_TOL };
    CheckEntry {
        check: "pointwise".into(),
        verdict: if fail { Verdict::Fail } else { Verdict::Pass },
        margin: Some(margin),
        certificate: fail.then_some(Certificate::Entry { k: l, l: k, value }),
        bounds: Bounds::default(),
    }
}

fn outcome_entry(cfg: &Configuration, out: &enumerate::FamilyOutcome, bound: i64, label: &str) -> CheckEntry {
    let fail = out.margin.is_some_and(|m| m > SLACK_TOL);
    let certificate = if fail {
        let lambda = out.lambda.clone().expect("margin implies lambda");
        let sigma: i64 = lambda.iter().sum();
        let lhs = quad_form(&cfg.dense(), cfg.n(), &lambda);
        Some(Certificate::Weights { rhs: lhs - out.margin.unwrap(), lambda, sigma })
    } else {
        None
    };
    CheckEntry {
        check: label.into(),
        verdict: if fail { Verdict::Fail } else { Verdict::Pass },
        margin: out.margin,
        certificate,
        bounds: Bounds { weight_bound: Some(bound), candidates: Some(out.checked), note: None },
    }
}

fn family_bound(family: WeightFamily, bound: i64) -> i64 {
    match family.value_set() {
        enumerate::ValueSet::Bounded => bound,
        _ => 1,
    }
}

/// Runs several families, sharing one sweep where the candidate sets nest.
fn run_families(cfg: &Configuration, families: &[WeightFamily], bound: i64) -> Vec<CheckEntry> {
    use enumerate::ValueSet;
    let n = cfg.n();
    let g = cfg.dense();
    let mut entries: Vec<Option<CheckEntry>> = vec![None; families.len()];
    let mut pending: Vec<usize> = Vec::new();
    for (i, &f) in families.iter().enumerate() {
        if f == WeightFamily::Shepp && n.is_multiple_of(2) {
            entries[i] = Some(CheckEntry::skipped(f.name(), format!("defined for an odd number of points, n = {n}")));
        } else if f == WeightFamily::Polygonal && n < 3 {
            entries[i] = Some(CheckEntry::skipped(f.name(), "needs at least 3 points".into()));
        } else if f == WeightFamily::Gap && n > MAX_GAP_LEN {
            entries[i] = Some(CheckEntry::skipped(f.name(), format!("exact gap limited to {MAX_GAP_LEN} points")));
        } else {
            pending.push(i);
        }
    }
    let set_size = |vs: ValueSet| match vs {
        ValueSet::Signs => candidate_count(2, n),
        ValueSet::Ternary => candidate_count(3, n),
        ValueSet::Bounded => candidate_count((2 * bound + 1) as usize, n),
    };
    let feasible = |vs: ValueSet| set_size(vs).is_some_and(|c| c <= MAX_CANDIDATES);
    // Widest feasible value set first; smaller sets are sub-lattices of it.
    for vs in [ValueSet::Bounded, ValueSet::Ternary, ValueSet::Signs] {
        let members: Vec<usize> = pending.iter().copied().filter(|&i| families[i].value_set() == vs).collect();
        if members.is_empty() {
            continue;
        }
        if !feasible(vs) {
            let size = set_size(vs).map_or("more than 2^64".to_string(), |c| c.to_string());
            for &i in &members {
                let b = family_bound(families[i], bound);
                entries[i] = Some(CheckEntry::skipped(
                    families[i].name(),
                    format!("{size} candidates with |lambda| <= {b} exceed the enumeration limit {MAX_CANDIDATES}"),
                ));
            }
            pending.retain(|i| !members.contains(i));
            continue;
        }
        let values: Vec<i64> = match vs {
            ValueSet::Bounded => (-bound..=bound).collect(),
            ValueSet::Ternary => vec![-1, 0, 1],
            ValueSet::Signs => vec![-1, 1],
        };
        // Every still-pending family whose set fits inside `values` joins.
        let joined: Vec<usize> = pending
            .iter()
            .copied()
            .filter(|&i| match (vs, families[i].value_set()) {
                (ValueSet::Bounded, _) => true,
                (ValueSet::Ternary, s) => s != ValueSet::Bounded,
                (ValueSet::Signs, s) => s == ValueSet::Signs,
            })
            .collect();
        let fams: Vec<WeightFamily> = joined.iter().map(|&i| families[i]).collect();
        let outs = enumerate::sweep(&g, n, &values, &fams);
        for (&i, out) in joined.iter().zip(&outs) {
            entries[i] = Some(outcome_entry(cfg, out, family_bound(out.family, bound), out.family.name()));
        }
        pending.retain(|i| !joined.contains(i));
    }
    entries.into_iter().map(|e| e.expect("every family resolved")).collect()
}

/// One integer-weight family, exhaustively over its candidate set.
pub fn check_integer_weights(cfg: &Configuration, family: WeightFamily, bound: i64) -> Result<CheckEntry> {
    if bound < 1 {
        return input(format!("weight bound must be positive, got {bound}"));
    }
    Ok(run_families(cfg, &[family], bound).remove(0))
}

pub fn check_gap(cfg: &Configuration, bound: i64) -> Result<CheckEntry> {
    check_integer_weights(cfg, WeightFamily::Gap, bound)
}

/// Polygonal inequalities: exhaustive up to 12 points, otherwise every
/// triangle plus seeded random balanced bipartitions.
pub fn check_polygonal(cfg: &Configuration, seed: u64) -> CheckEntry {
    let n = cfg.n();
    if n <= POLYGONAL_EXACT_MAX {
        return run_families(cfg, &[WeightFamily::Polygonal], 1).remove(0);
    }
    let g = cfg.dense();
    let mut best: Option<(f64, Vec<i64>)> = None;
    let consider = |lambda: Vec<i64>, best: &mut Option<(f64, Vec<i64>)>| {
        let m = quad_form(&g, n, &lambda);
        if best.as_ref().is_none_or(|b| m > b.0 + 1e-12 || (m >= b.0 - 1e-12 && lambda < b.1)) {
            *best = Some((m, lambda));
        }
    };
    let mut checked = 0u64;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for apex in [a, b, c] {
                    let mut lambda = vec![0i64; n];
                    for v in [a, b, c] {
                        lambda[v] = if v == apex { -1 } else { 1 };
                    }
                    consider(lambda, &mut best);
                    checked += 1;
                }
            }
        }
    }
    let mut rng = RngSpec::new(seed).rng();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..POLYGONAL_SAMPLES {
        order.shuffle(&mut rng);
        let mut lambda = vec![1i64; n];
        for &v in &order[..n / 2] {
            lambda[v] = -1;
        }
        consider(lambda, &mut best);
        checked += 1;
    }
    let (margin, lambda) = best.expect("n > 12 has triangles");
    let fail = margin > SLACK_TOL;
    let sigma = lambda.iter().sum();
    CheckEntry {
        check: "polygonal".into(),
        verdict: if fail { Verdict::Fail } else { Verdict::PassSampled },
        margin: Some(margin),
        certificate: fail.then_some(Certificate::Weights { lambda, sigma, rhs: 0.0 }),
        bounds: Bounds {
            weight_bound: Some(1),
            candidates: Some(checked),
            note: Some(format!("all triangles and {POLYGONAL_SAMPLES} random bipartitions (seed {seed})")),
        },
    }
}

/// Exact realizability as a report entry.
pub fn check_realizability(cfg: &Configuration) -> Result<CheckEntry> {
    let n = cfg.n();
    if n > lp::MAX_POINTS {
        return Ok(CheckEntry::skipped("realizability", format!("exact test limited to {} points", lp::MAX_POINTS)));
    }
    Ok(match lp::realizability(&cfg.g)? {
        Realizability::Feasible { atoms, moment_error } => CheckEntry {
            check: "realizability".into(),
            verdict: Verdict::Pass,
            margin: None,
            certificate: None,
            bounds: Bounds {
                note: Some(format!("{} atoms, moment error {moment_error:.1e}", atoms.len())),
                ..Bounds::default()
            },
        },
        Realizability::Infeasible { matrix, value, .. } => CheckEntry {
            check: "realizability".into(),
            verdict: Verdict::Fail,
            margin: Some(-value),
            certificate: Some(Certificate::CornerPositive { matrix, value }),
            bounds: Bounds::default(),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// Everything an indicator variogram must satisfy.
    Indicator,
    /// The subset that also binds madograms (no ½ bound, scale-free forms).
    Madogram,
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub bound: i64,
    pub seed: u64,
    pub profile: Profile,
    pub realizability: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { bound: DEFAULT_BOUND, seed: 0, profile: Profile::Indicator, realizability: true }
    }
}

pub const INDICATOR_FAMILIES: [WeightFamily; 8] = [
    WeightFamily::Polygonal,
    WeightFamily::Matheron,
    WeightFamily::OddClique,
    WeightFamily::Shepp,
    WeightFamily::Hypermetric,
    WeightFamily::Psd,
    WeightFamily::RoundedPsd,
    WeightFamily::Gap,
];

/// The full hierarchy for the chosen profile.
pub fn check_all(cfg: &Configuration, opts: &CheckOptions) -> Result<CheckReport> {
    if opts.bound < 1 {
        return input(format!("weight bound must be positive, got {}", opts.bound));
    }
    let n = cfg.n();
    let mut entries = vec![check_negative_type(cfg)];
    let sampled_polygonal = n > POLYGONAL_EXACT_MAX;
    match opts.profile {
        Profile::Indicator => {
            entries.push(check_pointwise(cfg));
            let fams: Vec<WeightFamily> = INDICATOR_FAMILIES
                .iter()
                .copied()
                .filter(|&f| !(sampled_polygonal && f == WeightFamily::Polygonal))
                .collect();
            let mut fam_entries = run_families(cfg, &fams, opts.bound);
            if sampled_polygonal {
                fam_entries.insert(0, check_polygonal(cfg, opts.seed));
            }
            entries.extend(fam_entries);
            if opts.realizability {
                entries.push(check_realizability(cfg)?);
            }
        }
        Profile::Madogram => {
            let mut fams = vec![WeightFamily::Matheron, WeightFamily::Hypermetric];
            if !sampled_polygonal {
                fams.insert(0, WeightFamily::Polygonal);
            }
            let mut fam_entries = run_families(cfg, &fams, opts.bound);
            if sampled_polygonal {
                fam_entries.insert(0, check_polygonal(cfg, opts.seed));
            }
            // The odd-clique member in its scale-free form: |σ| = 1, rhs 0.
            let odd = &mut fam_entries[1];
            odd.check = "odd_clique".into();
            odd.bounds.note = Some("scale-free form, |sigma| = 1 with rhs 0".into());
            entries.extend(fam_entries);
        }
    }
    Ok(CheckReport { entries })
}

#[cfg(test)]
mod tests;
