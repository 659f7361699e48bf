//! TOML run configuration: space, model, points and per-command sections.

use std::path::{Path, PathBuf};

use indivar::models::{
    CorrelationFamily, GaussianCorrelation, HarmonicSeries, MixtureComponent, MixtureSpec, NuggetCovariance,
    DEFAULT_SERIES_TOL, FAMILY_NAMES,
};
use indivar::simulate::GridSpec;
use indivar::{Graph, GraphMetric, Point, RngSpec, Space, VariogramModel};
use toml::{Table, Value};

pub type Res<T> = std::result::Result<T, String>;

/// A parsed config file plus the directory relative paths resolve against.
pub struct Config {
    pub table: Table,
    pub base: PathBuf,
}

impl Config {
    pub fn empty() -> Self {
        Self { table: Table::new(), base: PathBuf::from(".") }
    }

    pub fn load(path: &Path) -> Res<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let table = Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { table, base })
    }

    pub fn parse(text: &str) -> Res<Table> {
        text.parse::<Table>().map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
            match line {
                Some(l) => format!("line {l}: {}", e.message()),
                None => e.message().to_string(),
            }
        })
    }

    pub fn section(&self, name: &str) -> Res<Option<&Table>> {
        match self.table.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(format!("[{name}] must be a table")),
        }
    }

    pub fn check_top_level(&self) -> Res<()> {
        check_keys(
            &self.table,
            "top level",
            &[
                "seed",
                "out",
                "workers",
                "space",
                "model",
                "points",
                "grid",
                "check",
                "simulate",
                "estimate",
                "excursion",
            ],
        )
    }
}

pub fn check_keys(t: &Table, what: &str, allowed: &[&str]) -> Res<()> {
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(format!("unknown key `{k}` in {what}; expected one of: {}", allowed.join(", ")));
        }
    }
    Ok(())
}

pub fn get_f64(t: &Table, key: &str, what: &str) -> Res<Option<f64>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Float(v)) => Ok(Some(*v)),
        Some(Value::Integer(v)) => Ok(Some(*v as f64)),
        Some(v) => Err(format!("`{key}` in {what} must be a number, got {v}")),
    }
}

pub fn req_f64(t: &Table, key: &str, what: &str) -> Res<f64> {
    get_f64(t, key, what)?.ok_or_else(|| format!("{what} needs `{key}`"))
}

pub fn get_u64(t: &Table, key: &str, what: &str) -> Res<Option<u64>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Integer(v)) if *v >= 0 => Ok(Some(*v as u64)),
        Some(v) => Err(format!("`{key}` in {what} must be a non-negative integer, got {v}")),
    }
}

pub fn get_str<'a>(t: &'a Table, key: &str, what: &str) -> Res<Option<&'a str>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(v) => Err(format!("`{key}` in {what} must be a string, got {v}")),
    }
}

fn get_table<'a>(t: &'a Table, key: &str, what: &str) -> Res<&'a Table> {
    match t.get(key) {
        Some(Value::Table(s)) => Ok(s),
        Some(v) => Err(format!("`{key}` in {what} must be a table, got {v}")),
        None => Err(format!("{what} needs `{key}`")),
    }
}

fn lib<T>(r: indivar::Result<T>) -> Res<T> {
    r.map_err(|e| e.to_string())
}

pub fn space(cfg: &Config) -> Res<Space> {
    let Some(t) = cfg.section("space")? else {
        return Err("config needs a [space] section".into());
    };
    space_table(t, &cfg.base, "[space]")
}

/// Edge files resolve against `base`.
pub fn space_table(t: &Table, base: &Path, what: &str) -> Res<Space> {
    let kind = get_str(t, "kind", what)?.ok_or(format!("{what} needs `kind` (euclidean, sphere or graph)"))?;
    match kind {
        "euclidean" => {
            check_keys(t, what, &["kind", "dim"])?;
            lib(Space::euclidean(get_u64(t, "dim", what)?.unwrap_or(1) as usize))
        }
        "sphere" => {
            check_keys(t, what, &["kind", "dim", "radius"])?;
            lib(Space::sphere(
                get_u64(t, "dim", what)?.unwrap_or(2) as usize,
                get_f64(t, "radius", what)?.unwrap_or(1.0),
            ))
        }
        "graph" => {
            check_keys(t, what, &["kind", "edges", "edge_file", "vertices", "metric"])?;
            let graph = match (t.get("edges"), get_str(t, "edge_file", what)?) {
                (Some(Value::Array(rows)), None) => {
                    let mut edges = Vec::new();
                    for (i, r) in rows.iter().enumerate() {
                        let bad = || format!("edge {i} in {what} must be [k, l] or [k, l, weight]");
                        let Value::Array(r) = r else { return Err(bad()) };
                        let int = |v: &Value| v.as_integer().filter(|&x| x >= 0).map(|x| x as usize);
                        let k = r.first().and_then(int).ok_or_else(bad)?;
                        let l = r.get(1).and_then(int).ok_or_else(bad)?;
                        let w = match r.get(2) {
                            None => 1.0,
                            Some(v) => v.as_float().or_else(|| v.as_integer().map(|x| x as f64)).ok_or_else(bad)?,
                        };
                        edges.push((k, l, w));
                    }
                    let n = match get_u64(t, "vertices", what)? {
                        Some(n) => n as usize,
                        None => edges.iter().map(|e| e.0.max(e.1) + 1).max().unwrap_or(0),
                    };
                    lib(Graph::new(n, edges))?
                }
                (None, Some(file)) => {
                    let path = base.join(file);
                    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                    Graph::parse_edge_list(&text).map_err(|e| format!("{}: {e}", path.display()))?
                }
                _ => return Err(format!("{what} of kind graph needs exactly one of `edges` or `edge_file`")),
            };
            let metric = match get_str(t, "metric", what)?.unwrap_or("shortest_path") {
                "shortest_path" => GraphMetric::ShortestPath,
                "sqrt_resistance" => GraphMetric::SqrtResistance,
                "communicability" => GraphMetric::Communicability,
                m => {
                    return Err(format!(
                        "unknown graph metric `{m}`; expected shortest_path, sqrt_resistance or communicability"
                    ))
                }
            };
            lib(Space::graph(graph, metric))
        }
        k => Err(format!("unknown space kind `{k}`; expected euclidean, sphere or graph")),
    }
}

pub fn correlation(t: &Table, host: &Space, what: &str) -> Res<GaussianCorrelation> {
    let name = get_str(t, "family", what)?.ok_or_else(|| format!("{what} needs `family`"))?;
    let fam = match name {
        "exponential" => CorrelationFamily::Exponential,
        "gaussian" => CorrelationFamily::Gaussian,
        "cauchy" => CorrelationFamily::Cauchy { beta: req_f64(t, "beta", what)? },
        "stable" => CorrelationFamily::Stable { b: req_f64(t, "b", what)? },
        "spherical" => CorrelationFamily::Spherical,
        "cubic" => CorrelationFamily::Cubic,
        "matern" => CorrelationFamily::Matern { b: req_f64(t, "b", what)? },
        "cosine" => CorrelationFamily::Cosine,
        "constant" => CorrelationFamily::Constant,
        "white" => CorrelationFamily::White,
        other => {
            return Err(format!(
                "unknown correlation family `{other}` in {what}; known families: {}",
                CorrelationFamily::NAMES.join(", ")
            ))
        }
    };
    let mut allowed = vec!["family", "scale"];
    match fam {
        CorrelationFamily::Cauchy { .. } => allowed.push("beta"),
        CorrelationFamily::Stable { .. } | CorrelationFamily::Matern { .. } => allowed.push("b"),
        _ => {}
    }
    check_keys(t, what, &allowed)?;
    lib(GaussianCorrelation::new(fam, get_f64(t, "scale", what)?.unwrap_or(1.0), host.clone()))
}

/// Parameters may sit in the model table itself or in a `params` sub-table.
/// An inline `host` replaces the inherited space for this model and its
/// children.
fn flatten(t: &Table, host: &Space, base: &Path, what: &str) -> Res<(Table, Space)> {
    let mut out = t.clone();
    if let Some(p) = out.remove("params") {
        let Value::Table(p) = p else { return Err(format!("`params` in {what} must be a table")) };
        for (k, v) in p {
            if out.insert(k.clone(), v).is_some() {
                return Err(format!("`{k}` given twice in {what}"));
            }
        }
    }
    let host = match out.remove("host") {
        None => host.clone(),
        Some(Value::Table(h)) => space_table(&h, base, &format!("{what}.host"))?,
        Some(_) => return Err(format!("`host` in {what} must be a table")),
    };
    Ok((out, host))
}

/// Builds a model from its table; nested models inherit the host.
pub fn model(t: &Table, host: &Space, base: &Path, what: &str) -> Res<VariogramModel> {
    let (t, host) = flatten(t, host, base, what)?;
    let (t, host) = (&t, &host);
    let family = get_str(t, "family", what)?.ok_or_else(|| format!("{what} needs `family`"))?;
    let varpi = get_f64(t, "varpi", what)?.unwrap_or(1.0);
    let keys = |extra: &[&str]| {
        let mut k = vec!["family", "varpi"];
        k.extend_from_slice(extra);
        check_keys(t, what, &k)
    };
    let sub =
        |key: &str| -> Res<VariogramModel> { model(get_table(t, key, what)?, host, base, &format!("{what}.{key}")) };
    let corr = |key: &str| -> Res<GaussianCorrelation> {
        correlation(get_table(t, key, what)?, host, &format!("{what}.{key}"))
    };
    let h = host.clone();
    let m = match family {
        "tanh1" | "tanh2" | "ibessel" => {
            keys(&["lambda"])?;
            let l = req_f64(t, "lambda", what)?;
            match family {
                "tanh1" => VariogramModel::tanh1(l, varpi, h),
                "tanh2" => VariogramModel::tanh2(l, varpi, h),
                _ => VariogramModel::ibessel(l, varpi, h),
            }
        }
        "exponential" => {
            keys(&["a"])?;
            VariogramModel::exponential(req_f64(t, "a", what)?, varpi, h)
        }
        "gamma" | "stable" | "matern" => {
            keys(&["a", "b"])?;
            let (a, b) = (req_f64(t, "a", what)?, req_f64(t, "b", what)?);
            match family {
                "gamma" => VariogramModel::gamma(a, b, varpi, h),
                "stable" => VariogramModel::stable(a, b, varpi, h),
                _ => VariogramModel::matern(a, b, varpi, h),
            }
        }
        "series_odd" | "series_even" => {
            keys(&["correlation", "tol"])?;
            let kind = if family == "series_odd" { HarmonicSeries::Odd } else { HarmonicSeries::Even };
            let tol = get_f64(t, "tol", what)?.unwrap_or(DEFAULT_SERIES_TOL);
            VariogramModel::series(kind, corr("correlation")?, varpi, tol)
        }
        "sphere_linear" => {
            keys(&[])?;
            VariogramModel::sphere_linear(varpi, h)
        }
        "sphere_exponential" => {
            keys(&["t"])?;
            VariogramModel::sphere_exponential(req_f64(t, "t", what)?, varpi, h)
        }
        "triangular_wave" => {
            keys(&["k"])?;
            let k = get_u64(t, "k", what)?.ok_or_else(|| format!("{what} needs `k`"))?;
            VariogramModel::triangular_wave(k as u32, varpi, h)
        }
        "circle_quadratic" => {
            keys(&[])?;
            VariogramModel::circle_quadratic(varpi, h)
        }
        "nugget" => {
            keys(&["c", "half_correlation", "cubic_range"])?;
            let cov =
                match (get_f64(t, "c", what)?, t.contains_key("half_correlation"), get_f64(t, "cubic_range", what)?) {
                    (Some(c), false, None) => NuggetCovariance::Constant(c),
                    (None, true, None) => NuggetCovariance::HalfCorrelation(corr("half_correlation")?),
                    (None, false, Some(range)) => NuggetCovariance::Cubic { range },
                    _ => return Err(format!("{what} needs exactly one of `c`, `half_correlation` or `cubic_range`")),
                };
            VariogramModel::nugget(cov, varpi, h)
        }
        "erf_exponential" | "erf_tent" => {
            keys(&["correlation", "a", "k"])?;
            let a = req_f64(t, "a", what)?;
            let k = get_u64(t, "k", what)?.unwrap_or(1) as u32;
            if family == "erf_exponential" {
                VariogramModel::erf_exponential(corr("correlation")?, a, k, varpi)
            } else {
                VariogramModel::erf_tent(corr("correlation")?, a, k, varpi)
            }
        }
        "median_indicator" => {
            check_keys(t, what, &["family", "correlation", "atoms"])?;
            return mixture(t, host, base, what).and_then(|m| lib(VariogramModel::median_indicator_mixture(m)));
        }
        "correlation_variogram" => {
            check_keys(t, what, &["family", "correlation", "sill"])?;
            VariogramModel::correlation_variogram(corr("correlation")?, req_f64(t, "sill", what)?)
        }
        "scale" => {
            keys(&["base"])?;
            VariogramModel::scale(sub("base")?, varpi)
        }
        "mix" => {
            keys(&["first", "second"])?;
            VariogramModel::mix(sub("first")?, sub("second")?, varpi)
        }
        "product" => {
            check_keys(t, what, &["family", "first", "second"])?;
            VariogramModel::product(sub("first")?, sub("second")?)
        }
        "exp_composite" => {
            keys(&["base", "t"])?;
            VariogramModel::exp_composite(sub("base")?, req_f64(t, "t", what)?, varpi)
        }
        other => {
            return Err(format!(
                "unknown model family `{other}` in {what}; known families: {}",
                FAMILY_NAMES.join(", ")
            ))
        }
    };
    lib(m)
}

/// `correlation = {...}` for one atom or `atoms = [{weight, correlation | variogram}]`.
pub fn mixture(t: &Table, host: &Space, base: &Path, what: &str) -> Res<MixtureSpec> {
    match (t.get("correlation"), t.get("atoms")) {
        (Some(_), None) => Ok(MixtureSpec::single(correlation(
            get_table(t, "correlation", what)?,
            host,
            &format!("{what}.correlation"),
        )?)),
        (None, Some(Value::Array(atoms))) => {
            let mut out = Vec::new();
            for (i, a) in atoms.iter().enumerate() {
                let w = format!("{what}.atoms[{i}]");
                let Value::Table(a) = a else { return Err(format!("{w} must be a table")) };
                check_keys(a, &w, &["weight", "correlation", "variogram"])?;
                let weight = req_f64(a, "weight", &w)?;
                let comp = match (a.get("correlation"), a.get("variogram")) {
                    (Some(_), None) => {
                        MixtureComponent::Correlation(correlation(get_table(a, "correlation", &w)?, host, &w)?)
                    }
                    (None, Some(_)) => {
                        MixtureComponent::Variogram(model(get_table(a, "variogram", &w)?, host, base, &w)?)
                    }
                    _ => return Err(format!("{w} needs exactly one of `correlation` or `variogram`")),
                };
                out.push((weight, comp));
            }
            lib(MixtureSpec::new(out))
        }
        _ => Err(format!("{what} needs exactly one of `correlation` or `atoms`")),
    }
}

pub fn top_model(cfg: &Config, host: &Space) -> Res<VariogramModel> {
    let t = cfg.section("model")?.ok_or("config needs a [model] section")?;
    model(t, host, &cfg.base, "[model]")
}

/// Points from `coords`, `vertices` or `random` (+ `extent`), the latter
/// drawn from stream `u64::MAX` of the run seed.
pub fn points(cfg: &Config, host: &Space, seed: u64) -> Res<Vec<Point>> {
    let t = cfg.section("points")?.ok_or("config needs a [points] section")?;
    let what = "[points]";
    check_keys(t, what, &["coords", "vertices", "random", "extent"])?;
    let pts = match (t.get("coords"), t.get("vertices"), get_u64(t, "random", what)?) {
        (Some(Value::Array(rows)), None, None) => rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let bad = || format!("point {i} in [points] must be an array of numbers");
                let Value::Array(r) = r else { return Err(bad()) };
                r.iter()
                    .map(|v| v.as_float().or_else(|| v.as_integer().map(|x| x as f64)).ok_or_else(bad))
                    .collect::<Res<Vec<f64>>>()
                    .map(Point::Coords)
            })
            .collect::<Res<Vec<_>>>()?,
        (None, Some(Value::Array(vs)), None) => vs
            .iter()
            .map(|v| {
                v.as_integer()
                    .filter(|&x| x >= 0)
                    .map(|x| Point::Vertex(x as usize))
                    .ok_or_else(|| "vertices in [points] must be non-negative integers".to_string())
            })
            .collect::<Res<Vec<_>>>()?,
        (None, Some(Value::String(s)), None) if s == "all" => match host {
            Space::Graph(g) => (0..g.graph().n_vertices()).map(Point::Vertex).collect(),
            _ => return Err("`vertices = \"all\"` needs a graph space".into()),
        },
        (None, None, Some(n)) => {
            let extent = get_f64(t, "extent", what)?.unwrap_or(1.0);
            host.random_points(n as usize, extent, &mut RngSpec::new(seed).with_stream(u64::MAX).rng())
        }
        _ => return Err("[points] needs exactly one of `coords`, `vertices` or `random`".into()),
    };
    for (i, p) in pts.iter().enumerate() {
        host.validate_point(p).map_err(|e| format!("point {i}: {e}"))?;
    }
    Ok(pts)
}

pub fn grid(cfg: &Config) -> Res<Option<GridSpec>> {
    let Some(t) = cfg.section("grid")? else { return Ok(None) };
    let what = "[grid]";
    check_keys(t, what, &["nx", "ny", "spacing"])?;
    let nx = get_u64(t, "nx", what)?.ok_or("[grid] needs `nx`")? as usize;
    let ny = get_u64(t, "ny", what)?.ok_or("[grid] needs `ny`")? as usize;
    lib(GridSpec::new(nx, ny, get_f64(t, "spacing", what)?.unwrap_or(1.0))).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config { table: Config::parse(text).unwrap(), base: PathBuf::from(".") }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Config::parse("seed = 1\n[model]\nfamily = \n").unwrap_err();
        assert!(e.starts_with("line 3"), "{e}");
    }

    #[test]
    fn unknown_family_lists_catalog() {
        let c = cfg("[space]\nkind = \"euclidean\"\n[model]\nfamily = \"expo\"\n");
        let host = space(&c).unwrap();
        let e = top_model(&c, &host).unwrap_err();
        assert!(e.contains("expo") && e.contains("exponential") && e.contains("matern"), "{e}");
    }

    #[test]
    fn unknown_parameter_is_named() {
        let c = cfg("[space]\nkind = \"euclidean\"\n[model]\nfamily = \"exponential\"\na = 1\nscale = 2\n");
        let host = space(&c).unwrap();
        let e = top_model(&c, &host).unwrap_err();
        assert!(e.contains("`scale`") && e.contains("a"), "{e}");
    }

    #[test]
    fn nested_models_and_graphs() {
        let c = cfg(r#"
[space]
kind = "graph"
edges = [[0, 1], [1, 2, 2.0], [2, 0]]
metric = "sqrt_resistance"

[model]
family = "mix"
varpi = 0.5
first = { family = "exponential", a = 1.0 }
second = { family = "median_indicator", correlation = { family = "gaussian", scale = 2.0 } }

[points]
vertices = "all"
"#);
        let host = space(&c).unwrap();
        let m = top_model(&c, &host).unwrap();
        assert_eq!(m.family_name(), "mix");
        assert_eq!(points(&c, &host, 0).unwrap().len(), 3);
    }

    #[test]
    fn random_points_follow_the_seed() {
        let c = cfg("[space]\nkind = \"euclidean\"\ndim = 2\n[points]\nrandom = 5\nextent = 3.0\n");
        let host = space(&c).unwrap();
        assert_eq!(points(&c, &host, 4).unwrap(), points(&c, &host, 4).unwrap());
        assert_ne!(points(&c, &host, 4).unwrap(), points(&c, &host, 5).unwrap());
    }
}
