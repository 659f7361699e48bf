//! One function per subcommand. Each writes its outputs plus `provenance.json`
//! under the output directory and returns whether violations were found.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use indivar::estimate::{experimental_variogram, near_origin_exponent, Direction, LagBins, DEFAULT_NEAR_ORIGIN_LAGS};
use indivar::excursion::{g_lambda, ExcursionMethod, DEFAULT_TOL};
use indivar::io::{read_pgm, write_ensemble, write_json};
use indivar::models::{CorrelationFamily, MixtureComponent, ModelKind};
use indivar::simulate::{
    sequential_indicator_grid, simulate_excursion, simulate_gaussian, simulate_median_indicator,
    simulate_poisson_product, simulate_sphere_exponential, GridSpec, Layout, Neighborhood, Provenance,
    RealizationEnsemble, Values, DEFAULT_MAX_DATA, DEFAULT_Q,
};
use indivar::validity::{check_all, gamma_matrix, realizability_small, CheckOptions, Profile, Realizability};
use indivar::{GaussianCorrelation, MixtureSpec, Point, RngSpec, Space, VariogramModel};
use serde_json::{json, Value};
use toml::Table;

use crate::config::{self, check_keys, get_f64, get_str, get_u64, Config, Res};

pub enum Outcome {
    Success,
    Violations,
}

/// Resolved global settings shared by every command.
pub struct Run {
    pub cfg: Config,
    pub seed: u64,
    pub out: PathBuf,
    pub gnuplot: bool,
    pub command: &'static str,
}

fn lib<T>(r: indivar::Result<T>) -> Res<T> {
    r.map_err(|e| e.to_string())
}

impl Run {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Res<()> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        }
        std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn json(&self, name: &str, value: &Value) -> Res<()> {
        lib(write_json(&self.path(name), value))
    }

    /// The config as read plus every value the command actually used.
    fn provenance(&self, resolved: Value) -> Res<()> {
        let config = serde_json::to_value(&self.cfg.table).map_err(|e| e.to_string())?;
        self.json(
            "provenance.json",
            &json!({
                "command": self.command,
                "version": env!("CARGO_PKG_VERSION"),
                "seed": self.seed,
                "config": config,
                "resolved": resolved,
            }),
        )
    }

    fn section(&self, name: &str) -> Res<Table> {
        Ok(self.cfg.section(name)?.cloned().unwrap_or_default())
    }

    fn model_setup(&self) -> Res<(Space, VariogramModel)> {
        let host = config::space(&self.cfg)?;
        let model = config::top_model(&self.cfg, &host)?;
        Ok((host, model))
    }
}

fn points_json(points: &[Point]) -> Value {
    Value::Array(
        points
            .iter()
            .map(|p| match p {
                Point::Coords(c) => json!(c),
                Point::Vertex(v) => json!(v),
            })
            .collect(),
    )
}

pub fn eval(run: &Run) -> Res<Outcome> {
    let (host, model) = run.model_setup()?;
    let points = config::points(&run.cfg, &host, run.seed)?;
    let mut csv = String::from("i,j,distance,value\n");
    for i in 0..points.len() {
        for j in i..points.len() {
            let d = lib(host.distance(&points[i], &points[j]))?;
            let v = lib(model.eval(&points[i], &points[j]))?;
            let _ = writeln!(csv, "{i},{j},{d},{v}");
        }
    }
    run.write("values.csv", &csv)?;
    println!("{} pairs written to {}", points.len() * (points.len() + 1) / 2, run.path("values.csv").display());
    run.provenance(json!({ "space": host.to_string(), "model": model.describe(), "points": points_json(&points) }))?;
    Ok(Outcome::Success)
}

pub struct CheckFlags {
    pub bound: Option<i64>,
    pub profile: Option<String>,
    pub no_realizability: bool,
}

fn profile_of(name: &str) -> Res<Profile> {
    match name {
        "indicator" => Ok(Profile::Indicator),
        "madogram" => Ok(Profile::Madogram),
        p => Err(format!("unknown profile `{p}`; expected indicator or madogram")),
    }
}

pub fn check(run: &Run, flags: &CheckFlags) -> Res<Outcome> {
    let t = run.section("check")?;
    check_keys(&t, "[check]", &["bound", "profile", "realizability"])?;
    let mut opts = CheckOptions { seed: run.seed, ..CheckOptions::default() };
    if let Some(b) = flags.bound.or(get_u64(&t, "bound", "[check]")?.map(|b| b as i64)) {
        opts.bound = b;
    }
    let profile = flags.profile.clone().or(get_str(&t, "profile", "[check]")?.map(String::from));
    let profile = profile.unwrap_or_else(|| "indicator".into());
    opts.profile = profile_of(&profile)?;
    opts.realizability = match t.get("realizability") {
        None => true,
        Some(v) => v.as_bool().ok_or("`realizability` in [check] must be a boolean")?,
    } && !flags.no_realizability;

    let (host, model) = run.model_setup()?;
    let points = config::points(&run.cfg, &host, run.seed)?;
    let cfg = lib(gamma_matrix(&model, &points))?;
    let report = lib(check_all(&cfg, &opts))?;
    run.write("report.json", &(report.to_json() + "\n"))?;
    print!("{}", report.table());
    run.provenance(json!({
        "space": host.to_string(),
        "model": model.describe(),
        "points": points_json(&points),
        "check": { "bound": opts.bound, "profile": profile, "realizability": opts.realizability, "seed": opts.seed },
    }))?;
    Ok(if report.all_pass() { Outcome::Success } else { Outcome::Violations })
}

pub fn realize(run: &Run) -> Res<Outcome> {
    let (host, model) = run.model_setup()?;
    let points = config::points(&run.cfg, &host, run.seed)?;
    let cfg = lib(gamma_matrix(&model, &points))?;
    let result = lib(realizability_small(&cfg.g))?;
    let value = serde_json::to_value(&result).map_err(|e| e.to_string())?;
    run.json("realizability.json", &value)?;
    let feasible = match &result {
        Realizability::Feasible { atoms, moment_error } => {
            println!("feasible: {} atoms, moment error {moment_error:.1e}", atoms.len());
            true
        }
        Realizability::Infeasible { value, .. } => {
            println!("infeasible: corner-positive certificate with <M, 1-4g> = {value:.6e}");
            false
        }
    };
    run.provenance(json!({ "space": host.to_string(), "model": model.describe(), "points": points_json(&points) }))?;
    Ok(if feasible { Outcome::Success } else { Outcome::Violations })
}

pub struct SimulateFlags {
    pub algorithm: Option<String>,
    pub n_real: Option<usize>,
}

const SIMULATE_KEYS: &[&str] =
    &["algorithm", "n_real", "threshold", "t", "q", "mean", "max_data", "radius", "correlation"];

const DEFAULT_N_REAL: usize = 100;

/// The single correlation behind a model, for the Gaussian-based samplers.
fn correlation_source(t: &Table, model: Option<&VariogramModel>, host: &Space) -> Res<GaussianCorrelation> {
    if t.contains_key("correlation") {
        let Some(toml::Value::Table(c)) = t.get("correlation") else {
            return Err("`correlation` in [simulate] must be a table".into());
        };
        return config::correlation(c, host, "[simulate].correlation");
    }
    if let Some(ModelKind::MedianIndicator { mixture }) = model.map(VariogramModel::kind) {
        if let [(w, MixtureComponent::Correlation(c))] = mixture.atoms() {
            if *w == 1.0 {
                return Ok(c.clone());
            }
        }
    }
    Err("this algorithm needs a Gaussian correlation: set [simulate].correlation or use a single-atom median_indicator model".into())
}

fn mixture_source(model: Option<&VariogramModel>) -> Res<MixtureSpec> {
    match model.map(VariogramModel::kind) {
        Some(ModelKind::MedianIndicator { mixture }) => Ok(mixture.clone()),
        _ => Err("this algorithm needs a median_indicator model".into()),
    }
}

/// Runs the sampler described by `[simulate]`, on `[grid]` if present and
/// `[points]` otherwise. Returns the ensemble and its model for comparison.
fn simulate_from_config(run: &Run, flags: &SimulateFlags) -> Res<(RealizationEnsemble, Option<VariogramModel>, Value)> {
    let t = run.section("simulate")?;
    check_keys(&t, "[simulate]", SIMULATE_KEYS)?;
    let w = "[simulate]";
    let host = config::space(&run.cfg)?;
    let model = match run.cfg.section("model")? {
        Some(_) => Some(config::top_model(&run.cfg, &host)?),
        None => None,
    };
    let grid = config::grid(&run.cfg)?;
    let default_alg = match (model.as_ref().map(VariogramModel::kind), grid) {
        (Some(ModelKind::SphereExponential { .. }), _) => "sphere_exponential",
        (_, Some(_)) => "sis",
        (Some(ModelKind::MedianIndicator { .. }), None) => "median_indicator",
        _ => "gaussian",
    };
    let algorithm = match &flags.algorithm {
        Some(a) => a.clone(),
        None => get_str(&t, "algorithm", w)?.unwrap_or(default_alg).to_string(),
    };
    let n_real = match flags.n_real {
        Some(n) => n,
        None => get_u64(&t, "n_real", w)?.map_or(DEFAULT_N_REAL, |n| n as usize),
    };
    let rng = RngSpec::new(run.seed);
    let points = match grid {
        Some(g) if algorithm != "sis" => g.points(),
        Some(_) => Vec::new(),
        None => config::points(&run.cfg, &host, run.seed)?,
    };
    let mut resolved = json!({ "algorithm": algorithm, "n_real": n_real, "space": host.to_string() });
    let mut ens = match algorithm.as_str() {
        "median_indicator" => lib(simulate_median_indicator(&mixture_source(model.as_ref())?, &points, n_real, rng))?,
        "excursion" => {
            let threshold = get_f64(&t, "threshold", w)?.unwrap_or(0.0);
            resolved["threshold"] = json!(threshold);
            let rho = correlation_source(&t, model.as_ref(), &host)?;
            lib(simulate_excursion(&rho, threshold, &points, n_real, rng))?
        }
        "gaussian" => lib(simulate_gaussian(&correlation_source(&t, model.as_ref(), &host)?, &points, n_real, rng))?,
        "poisson_product" => {
            let rate = get_f64(&t, "t", w)?.ok_or("poisson_product needs `t` in [simulate]")?;
            resolved["t"] = json!(rate);
            lib(simulate_poisson_product(&mixture_source(model.as_ref())?, rate, &points, n_real, rng))?
        }
        "sphere_exponential" => {
            let rate = match (get_f64(&t, "t", w)?, model.as_ref().map(VariogramModel::kind)) {
                (Some(r), _) => r,
                (None, Some(ModelKind::SphereExponential { t })) => *t,
                _ => return Err("sphere_exponential needs `t` in [simulate] or a sphere_exponential model".into()),
            };
            let q = get_u64(&t, "q", w)?.map_or(DEFAULT_Q, |q| q as usize);
            resolved["t"] = json!(rate);
            resolved["q"] = json!(q);
            lib(simulate_sphere_exponential(rate, &host, &points, q, n_real, rng))?
        }
        "sis" => {
            let grid = grid.ok_or("sis needs a [grid] section")?;
            let model = model.as_ref().ok_or("sis needs a [model] section")?;
            let mean = get_f64(&t, "mean", w)?.unwrap_or(0.5);
            let nb = Neighborhood {
                max_data: get_u64(&t, "max_data", w)?.map_or(DEFAULT_MAX_DATA, |m| m as usize),
                radius: get_f64(&t, "radius", w)?.unwrap_or(f64::INFINITY),
            };
            resolved["mean"] = json!(mean);
            resolved["max_data"] = json!(nb.max_data);
            resolved["radius"] = if nb.radius.is_finite() { json!(nb.radius) } else { json!("inf") };
            lib(sequential_indicator_grid(model, grid, nb, mean, n_real, rng))?
        }
        a => {
            return Err(format!(
                "unknown algorithm `{a}`; expected median_indicator, excursion, gaussian, poisson_product, sphere_exponential or sis"
            ))
        }
    };
    if let Some(g) = grid {
        ens.layout = Layout::Grid(g);
        resolved["grid"] = json!({ "nx": g.nx, "ny": g.ny, "spacing": g.spacing });
    } else {
        resolved["points"] = points_json(&points);
    }
    if let Some(m) = &model {
        resolved["model"] = m.describe();
    }
    resolved["ensemble"] = serde_json::to_value(&ens.provenance).map_err(|e| e.to_string())?;
    Ok((ens, model, resolved))
}

pub fn simulate(run: &Run, flags: &SimulateFlags) -> Res<Outcome> {
    let (ens, _, resolved) = simulate_from_config(run, flags)?;
    let paths = lib(write_ensemble(&ens, &run.out, "realization"))?;
    println!("{} realizations, {} files in {}", ens.n_real(), paths.len(), run.out.display());
    run.provenance(resolved)?;
    Ok(Outcome::Success)
}

fn parse_direction(s: &str) -> Res<Direction> {
    match s {
        "omni" | "omnidirectional" => Ok(Direction::Omnidirectional),
        "x" => Ok(Direction::Axis(0)),
        "y" => Ok(Direction::Axis(1)),
        "z" => Ok(Direction::Axis(2)),
        d => Err(format!("unknown direction `{d}`; expected omni, x, y or z")),
    }
}

/// Loads a directory of PGM realizations or a `point_index,realization,value`
/// CSV laid out on `[points]`.
fn load_ensemble(run: &Run, path: &Path, spacing: f64) -> Res<RealizationEnsemble> {
    let provenance = |algorithm: &str, n_real| Provenance {
        algorithm: algorithm.into(),
        model: Value::Null,
        rng: RngSpec::new(run.seed),
        n_real,
        params: json!({ "input": path.display().to_string() }),
        diagnostics: json!({}),
    };
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| format!("{}: {e}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "pgm"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(format!("no .pgm files in {}", path.display()));
        }
        let mut shape = None;
        let mut values = Vec::new();
        for f in &files {
            let bytes = std::fs::read(f).map_err(|e| format!("{}: {e}", f.display()))?;
            let (nx, ny, v) = read_pgm(&bytes).map_err(|e| format!("{}: {e}", f.display()))?;
            if *shape.get_or_insert((nx, ny)) != (nx, ny) {
                return Err(format!("{} is {nx} x {ny}, earlier images differ", f.display()));
            }
            values.push(v);
        }
        let (nx, ny) = shape.expect("at least one image");
        let n = values.len();
        return Ok(RealizationEnsemble {
            layout: Layout::Grid(lib(GridSpec::new(nx, ny, spacing))?),
            values: Values::Binary(values),
            provenance: provenance("pgm_input", n),
        });
    }
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let host = config::space(&run.cfg)?;
    let points = config::points(&run.cfg, &host, run.seed)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || format!("{}: line {}: expected point_index,realization,value", path.display(), ln + 1);
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(bad());
        }
        let p: usize = f[0].parse().map_err(|_| bad())?;
        let r: usize = f[1].parse().map_err(|_| bad())?;
        let v: f64 = f[2].parse().map_err(|_| bad())?;
        if p >= points.len() {
            return Err(format!("{}: line {}: point {p} but [points] has {}", path.display(), ln + 1, points.len()));
        }
        if rows.len() <= r {
            rows.resize(r + 1, vec![f64::NAN; points.len()]);
        }
        rows[r][p] = v;
    }
    if rows.is_empty() || rows.iter().flatten().any(|v| v.is_nan()) {
        return Err(format!("{}: every realization needs a value at every point", path.display()));
    }
    let n = rows.len();
    let values = if rows.iter().flatten().all(|&v| v == 0.0 || v == 1.0) {
        Values::Binary(rows.iter().map(|r| r.iter().map(|&v| v as u8).collect()).collect())
    } else {
        Values::Real(rows)
    };
    Ok(RealizationEnsemble {
        layout: Layout::Points { space: host, points },
        values,
        provenance: provenance("csv_input", n),
    })
}

pub struct EstimateFlags {
    pub alpha: Option<f64>,
    pub input: Option<PathBuf>,
}

fn gnuplot_curve(title: &str, csv: &str, with_model: bool) -> String {
    let mut s = format!(
        "set datafile separator ','\nset key top left\nset xlabel 'lag'\nset ylabel 'variogram'\nset title '{title}'\n"
    );
    let _ = write!(s, "plot '{csv}' every ::1 using 1:2 with linespoints title 'experimental'");
    if with_model {
        s.push_str(", '' every ::1 using 1:3 with lines title 'model'");
    }
    s.push('\n');
    s
}

pub fn estimate(run: &Run, flags: &EstimateFlags) -> Res<Outcome> {
    let t = run.section("estimate")?;
    let w = "[estimate]";
    check_keys(&t, w, &["alpha", "lags", "spacing", "tolerance", "direction", "input", "near_origin_lags"])?;
    let alpha = flags.alpha.or(get_f64(&t, "alpha", w)?).unwrap_or(1.0);
    let grid = config::grid(&run.cfg)?;
    let spacing = get_f64(&t, "spacing", w)?.or(grid.map(|g| g.spacing)).unwrap_or(1.0);
    let n_lags = get_u64(&t, "lags", w)?.map_or(10, |n| n as usize);
    let tolerance = get_f64(&t, "tolerance", w)?.unwrap_or(spacing / 2.0);
    let direction_name = get_str(&t, "direction", w)?.unwrap_or("omni");
    let direction = parse_direction(direction_name)?;
    let near = get_u64(&t, "near_origin_lags", w)?.map_or(DEFAULT_NEAR_ORIGIN_LAGS, |n| n as usize);
    let input = match &flags.input {
        Some(p) => Some(p.clone()),
        None => get_str(&t, "input", w)?.map(|p| run.cfg.base.join(p)),
    };
    let (ens, model, mut resolved) = match &input {
        Some(p) => {
            let ens = load_ensemble(run, p, spacing)?;
            let model = match run.cfg.section("model")? {
                Some(_) => Some(config::top_model(&run.cfg, &config::space(&run.cfg)?)?),
                None => None,
            };
            (ens, model, json!({ "input": p.display().to_string() }))
        }
        None => simulate_from_config(run, &SimulateFlags { algorithm: None, n_real: None })?,
    };
    let centers: Vec<f64> = (1..=n_lags).map(|k| k as f64 * spacing).collect();
    let bins = lib(LagBins::new(direction, centers, tolerance))?;
    let curve = lib(experimental_variogram(&ens, &bins, alpha))?;
    for warning in &curve.warnings {
        eprintln!("warning: {warning}");
    }
    let mut csv =
        String::from(if model.is_some() { "lag,estimate,model,pair_count\n" } else { "lag,estimate,pair_count\n" });
    for p in &curve.ensemble {
        match &model {
            Some(m) => {
                let _ = writeln!(csv, "{},{},{},{}", p.lag, p.estimate, m.at_lag(p.lag, false), p.pair_count);
            }
            None => {
                let _ = writeln!(csv, "{},{},{}", p.lag, p.estimate, p.pair_count);
            }
        }
    }
    run.write("variogram.csv", &csv)?;
    run.write("variogram_realizations.csv", &curve.to_csv())?;
    let exponent = near_origin_exponent(&curve, near);
    let summary = json!({
        "alpha": alpha,
        "near_origin_exponent": exponent.as_ref().ok(),
        "near_origin_lags": near,
        "means": { "ensemble": mean(&ens.realization_means()) },
        "warnings": curve.warnings,
    });
    run.json("summary.json", &summary)?;
    if run.gnuplot {
        run.write("variogram.gp", &gnuplot_curve("experimental variogram", "variogram.csv", model.is_some()))?;
    }
    match exponent {
        Ok(e) => println!("{} lags written; near-origin exponent {e:.4}", curve.ensemble.len()),
        Err(e) => println!("{} lags written; no near-origin exponent ({e})", curve.ensemble.len()),
    }
    resolved["estimate"] = json!({
        "alpha": alpha, "lags": n_lags, "spacing": spacing, "tolerance": tolerance,
        "direction": direction_name, "near_origin_lags": near,
    });
    run.provenance(resolved)?;
    Ok(Outcome::Success)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn f64_list(t: &Table, key: &str, what: &str) -> Res<Option<Vec<f64>>> {
    match t.get(key) {
        None => Ok(None),
        Some(toml::Value::Array(a)) => a
            .iter()
            .map(|v| {
                v.as_float()
                    .or_else(|| v.as_integer().map(|x| x as f64))
                    .ok_or_else(|| format!("`{key}` in {what} must be an array of numbers"))
            })
            .collect::<Res<Vec<_>>>()
            .map(Some),
        Some(_) => Err(format!("`{key}` in {what} must be an array of numbers")),
    }
}

pub fn excursion(run: &Run) -> Res<Outcome> {
    let t = run.section("excursion")?;
    let w = "[excursion]";
    check_keys(&t, w, &["rho", "lambda", "methods", "tol", "hermite_terms"])?;
    let rhos = f64_list(&t, "rho", w)?.unwrap_or_else(|| (-9..=9).map(|k| k as f64 / 10.0).collect());
    let lambdas = f64_list(&t, "lambda", w)?.unwrap_or_else(|| vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]);
    let tol = get_f64(&t, "tol", w)?.unwrap_or(DEFAULT_TOL);
    let n_terms = get_u64(&t, "hermite_terms", w)?.map(|n| n as usize);
    let names: Vec<String> = match t.get("methods") {
        None => vec!["quadrature".into(), "hermite".into(), "tan_integral".into()],
        Some(toml::Value::Array(a)) => a
            .iter()
            .map(|v| v.as_str().map(String::from).ok_or_else(|| "`methods` in [excursion] must be strings".to_string()))
            .collect::<Res<_>>()?,
        Some(_) => return Err("`methods` in [excursion] must be an array of strings".into()),
    };
    let methods: Vec<ExcursionMethod> = names
        .iter()
        .map(|n| match n.as_str() {
            "quadrature" => Ok(ExcursionMethod::Quadrature),
            "hermite" => Ok(ExcursionMethod::Hermite { n_terms }),
            "tan_integral" => Ok(ExcursionMethod::TanIntegral),
            m => Err(format!("unknown method `{m}`; expected quadrature, hermite or tan_integral")),
        })
        .collect::<Res<_>>()?;
    let mut csv = String::from("rho,lambda,method,value\n");
    let mut spread: f64 = 0.0;
    for &rho in &rhos {
        for &lambda in &lambdas {
            let mut vals = Vec::new();
            for m in &methods {
                let v = lib(g_lambda(rho, lambda, *m, tol))?;
                let _ = writeln!(csv, "{rho},{lambda},{},{v}", m.name());
                vals.push(v);
            }
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            spread = spread.max(hi - lo);
        }
    }
    run.write("excursion.csv", &csv)?;
    run.json("summary.json", &json!({ "max_method_spread": spread, "points": rhos.len() * lambdas.len() }))?;
    if run.gnuplot {
        let mut s = String::from(
            "set datafile separator ','\nset xlabel 'rho'\nset ylabel 'g_lambda'\nset key top right\nplot ",
        );
        let curves: Vec<String> = lambdas
            .iter()
            .map(|l| {
                format!(
                    "'excursion.csv' using ((strcol(3) eq '{}' && $2 == {l}) ? $1 : 1/0):4 with linespoints title 'lambda = {l}'",
                    methods[0].name()
                )
            })
            .collect();
        s.push_str(&curves.join(", \\\n     "));
        s.push('\n');
        run.write("excursion.gp", &s)?;
    }
    println!(
        "{} values written; largest disagreement between methods {spread:.2e}",
        rhos.len() * lambdas.len() * methods.len()
    );
    run.provenance(json!({ "rho": rhos, "lambda": lambdas, "methods": names, "tol": tol, "hermite_terms": n_terms }))?;
    Ok(Outcome::Success)
}

pub struct Fig2Flags {
    pub models: Vec<String>,
    pub n_real: usize,
    pub range: f64,
    pub nx: usize,
    pub ny: usize,
    pub lags: usize,
}

/// Distinct stream blocks so each input model draws the same numbers whether
/// it runs alone or with the other.
fn fig2_stream(name: &str) -> u64 {
    match name {
        "cubic" => 0,
        _ => 1 << 32,
    }
}

pub fn fig2_model(name: &str, range: f64) -> Res<VariogramModel> {
    let host = lib(Space::euclidean(2))?;
    match name {
        "cubic" => {
            let rho = lib(GaussianCorrelation::new(CorrelationFamily::Cubic, range, host))?;
            lib(VariogramModel::correlation_variogram(rho, 0.25))
        }
        "exponential" => lib(VariogramModel::exponential(3.0 / range, 1.0, host)),
        m => Err(format!("unknown figure model `{m}`; expected cubic, exponential or both")),
    }
}

pub fn repro_fig2(run: &Run, flags: &Fig2Flags) -> Res<Outcome> {
    let grid = lib(GridSpec::new(flags.nx, flags.ny, 1.0))?;
    let bins = lib(LagBins::regular(Direction::Omnidirectional, 1.0, flags.lags))?;
    let mut combined = String::from("model,lag,experimental,input\n");
    let mut summary = serde_json::Map::new();
    let mut models_json = serde_json::Map::new();
    for name in &flags.models {
        let model = fig2_model(name, flags.range)?;
        let rng = RngSpec::new(run.seed).with_stream(fig2_stream(name));
        let ens = lib(sequential_indicator_grid(&model, grid, Neighborhood::default(), 0.5, flags.n_real, rng))?;
        lib(write_ensemble(&ens, &run.path(name), "realization"))?;
        let curve = lib(experimental_variogram(&ens, &bins, 1.0))?;
        run.write(&format!("{name}/variogram_realizations.csv"), &curve.to_csv())?;
        let mut worst: f64 = 0.0;
        for p in &curve.ensemble {
            let input = model.at_lag(p.lag, false);
            let _ = writeln!(combined, "{name},{},{},{input}", p.lag, p.estimate);
            if p.lag >= 3.0 {
                worst = worst.max((p.estimate - input).abs() / input);
            }
        }
        let exponent = lib(near_origin_exponent(&curve, DEFAULT_NEAR_ORIGIN_LAGS))?;
        let means = ens.realization_means();
        let ens_mean = mean(&means);
        let worst_mean = means.iter().map(|m| (m - 0.5).abs()).fold(0.0, f64::max);
        println!(
            "{name}: near-origin exponent {exponent:.3}, worst relative error at lags >= 3 {worst:.3}, ensemble mean {ens_mean:.4}"
        );
        summary.insert(
            name.clone(),
            json!({
                "near_origin_exponent": exponent,
                "near_origin_lags": DEFAULT_NEAR_ORIGIN_LAGS,
                "max_relative_error_lag_ge_3": worst,
                "ensemble_mean": ens_mean,
                "max_realization_mean_deviation": worst_mean,
                "diagnostics": ens.provenance.diagnostics,
            }),
        );
        models_json.insert(name.clone(), json!({ "model": model.describe(), "rng": rng }));
    }
    run.write("variogram.csv", &combined)?;
    run.json("summary.json", &Value::Object(summary))?;
    if run.gnuplot {
        let mut s = String::from(
            "set datafile separator ','\nset xlabel 'lag (grid spacings)'\nset ylabel 'indicator variogram'\nset key bottom right\nplot ",
        );
        let curves: Vec<String> = flags
            .models
            .iter()
            .flat_map(|m| {
                [
                    format!(
                        "'variogram.csv' using (strcol(1) eq '{m}' ? $2 : 1/0):3 with points title '{m} experimental'"
                    ),
                    format!("'variogram.csv' using (strcol(1) eq '{m}' ? $2 : 1/0):4 with lines title '{m} input'"),
                ]
            })
            .collect();
        s.push_str(&curves.join(", \\\n     "));
        s.push('\n');
        run.write("fig2.gp", &s)?;
    }
    run.provenance(json!({
        "grid": { "nx": flags.nx, "ny": flags.ny, "spacing": 1.0 },
        "range": flags.range,
        "n_real": flags.n_real,
        "lags": flags.lags,
        "mean": 0.5,
        "neighborhood": { "max_data": DEFAULT_MAX_DATA, "radius": "inf" },
        "path": "random",
        "models": models_json,
    }))?;
    Ok(Outcome::Success)
}

pub struct Fig3Flags {
    pub t: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub q: usize,
    pub n_real: usize,
}

/// Pixel centers of an equirectangular map, north at the top row.
pub fn equirectangular(nx: usize, ny: usize) -> Vec<Point> {
    let mut pts = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        let lat = PI / 2.0 - PI * (iy as f64 + 0.5) / ny as f64;
        for ix in 0..nx {
            let lon = 2.0 * PI * (ix as f64 + 0.5) / nx as f64;
            pts.push(Point::from(vec![lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]));
        }
    }
    pts
}

pub fn repro_fig3(run: &Run, flags: &Fig3Flags) -> Res<Outcome> {
    let host = lib(Space::sphere(2, 1.0))?;
    let grid = lib(GridSpec::new(flags.nx, flags.ny, 1.0))?;
    let points = equirectangular(flags.nx, flags.ny);
    let mut summary = serde_json::Map::new();
    for (k, &t) in flags.t.iter().enumerate() {
        let rng = RngSpec::new(run.seed).with_stream((k as u64) << 32);
        let mut ens = lib(simulate_sphere_exponential(t, &host, &points, flags.q, flags.n_real, rng))?;
        ens.layout = Layout::Grid(grid);
        let dir = format!("t{t}");
        lib(write_ensemble(&ens, &run.path(&dir), "realization"))?;
        let m = mean(&ens.realization_means());
        println!("t = {t}: {} map(s) in {}, mean {m:.4}", flags.n_real, run.path(&dir).display());
        summary.insert(dir, json!({ "t": t, "mean": m, "rng": rng }));
    }
    run.json("summary.json", &Value::Object(summary))?;
    run.provenance(json!({
        "t": flags.t,
        "projection": "equirectangular",
        "nx": flags.nx,
        "ny": flags.ny,
        "q": flags.q,
        "n_real": flags.n_real,
    }))?;
    Ok(Outcome::Success)
}
