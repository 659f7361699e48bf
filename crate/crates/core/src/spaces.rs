//! Point-hosting spaces and their distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::linalg::SymmetricMatrix;

/// A point of a [`Space`]: embedding coordinates, or a graph vertex index.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Point {
    Coords(Vec<f64>),
    Vertex(usize),
}

impl Point {
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Vertex(_) => None,
        }
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::Coords(v)
    }
}

/// Distance used on the vertices of a finite graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMetric {
    ShortestPath,
    /// Square root of the resistance distance (a Euclidean distance).
    SqrtResistance,
    /// Communicability distance; unweighted graphs only.
    Communicability,
}

impl GraphMetric {
    pub fn name(self) -> &'static str {
        match self {
            GraphMetric::ShortestPath => "shortest_path",
            GraphMetric::SqrtResistance => "sqrt_resistance",
            GraphMetric::Communicability => "communicability",
        }
    }

    /// Whether the metric embeds isometrically in a Euclidean space.
    pub fn is_euclidean(self) -> bool {
        !matches!(self, GraphMetric::ShortestPath)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub k: usize,
    pub l: usize,
    pub weight: f64,
}

/// Undirected simple finite weighted graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Validates and normalizes the edge list (`k < l`, sorted).
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n_vertices == 0 {
            return input("graph must have at least one vertex");
        }
        let mut out: Vec<Edge> = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return input(format!("self-loop at vertex {a}"));
            }
            if a >= n_vertices || b >= n_vertices {
                return input(format!("edge ({a}, {b}) references a vertex >= {n_vertices}"));
            }
            if !(w > 0.0 && w.is_finite()) {
                return input(format!("edge ({a}, {b}) has non-positive weight {w}"));
            }
            out.push(Edge { k: a.min(b), l: a.max(b), weight: w });
        }
        out.sort_by_key(|e| (e.k, e.l));
        if let Some(w) = out.windows(2).find(|w| (w[0].k, w[0].l) == (w[1].k, w[1].l)) {
            return input(format!("duplicate edge ({}, {})", w[0].k, w[0].l));
        }
        Ok(Self { n_vertices, edges: out })
    }

    /// Parses the plain-text edge list: vertex count on the first
    /// non-comment line, then one `k l weight` triple per line. `#` starts a
    /// comment. The weight may be omitted and defaults to 1.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut n_vertices = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: String| Error::Parse { line: line_no, msg };
            if n_vertices.is_none() {
                if fields.len() != 1 {
                    return Err(bad("expected the vertex count".into()));
                }
                n_vertices = Some(fields[0].parse::<usize>().map_err(|e| bad(format!("vertex count: {e}")))?);
                continue;
            }
            if !(2..=3).contains(&fields.len()) {
                return Err(bad(format!("expected `k l weight`, got {} fields", fields.len())));
            }
            let k = fields[0].parse::<usize>().map_err(|e| bad(format!("vertex: {e}")))?;
            let l = fields[1].parse::<usize>().map_err(|e| bad(format!("vertex: {e}")))?;
            let w = match fields.get(2) {
                Some(s) => s.parse::<f64>().map_err(|e| bad(format!("weight: {e}")))?,
                None => 1.0,
            };
            edges.push((k, l, w));
        }
        let n = n_vertices.ok_or(Error::Parse { line: 1, msg: "missing vertex count".into() })?;
        Graph::new(n, edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1.0)
    }

    pub fn weight_matrix(&self) -> SymmetricMatrix {
        let mut w = SymmetricMatrix::zeros(self.n_vertices);
        for e in &self.edges {
            w.set(e.k, e.l, e.weight);
        }
        w
    }

    pub fn laplacian(&self) -> SymmetricMatrix {
        let mut lap = SymmetricMatrix::zeros(self.n_vertices);
        for e in &self.edges {
            lap.set(e.k, e.l, -e.weight);
            lap.set(e.k, e.k, lap.get(e.k, e.k) + e.weight);
            lap.set(e.l, e.l, lap.get(e.l, e.l) + e.weight);
        }
        lap
    }

    fn adjacency_lists(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            adj[e.k].push((e.l, e.weight));
            adj[e.l].push((e.k, e.weight));
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency_lists();
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All-pairs shortest-path distances (Dijkstra from every vertex).
/// Disconnected pairs are `+∞`.
pub fn shortest_path_matrix(graph: &Graph) -> SymmetricMatrix {
    let n = graph.n_vertices();
    let adj = graph.adjacency_lists();
    let mut out = SymmetricMatrix::zeros(n);
    for src in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem(0.0, src));
        while let Some(HeapItem(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, w) in &adj[v] {
                let nd = d + w;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(HeapItem(nd, u));
                }
            }
        }
        for (dst, &d) in dist.iter().enumerate().take(src) {
            out.set(src, dst, d);
        }
    }
    out
}

/// Effective resistance between all vertex pairs, from the Moore-Penrose
/// pseudoinverse of the weighted Laplacian.
pub fn resistance_distance_matrix(graph: &Graph) -> Result<SymmetricMatrix> {
    let n = graph.n_vertices();
    let eig = graph.laplacian().eigen();
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = 1e-12 * top;
    let null_dim = eig.values.iter().filter(|&&v| v <= cutoff).count();
    if null_dim > 1 || (n > 1 && top == 0.0) {
        return input(format!("graph is disconnected (Laplacian null space has dimension {})", null_dim.max(n)));
    }
    let pinv = SymmetricMatrix::from_fn(n, |k, l| {
        eig.values.iter().zip(&eig.vectors).filter(|(&m, _)| m > cutoff).map(|(&m, v)| v[k] * v[l] / m).sum()
    });
    Ok(SymmetricMatrix::from_fn(n, |k, l| {
        if k == l {
            0.0
        } else {
            (pinv.get(k, k) + pinv.get(l, l) - 2.0 * pinv.get(k, l)).max(0.0)
        }
    }))
}

/// Communicability distance `sqrt(G_kk + G_ll - 2 G_kl)` with `G = exp(A)`.
pub fn communicability_distance_matrix(graph: &Graph) -> Result<SymmetricMatrix> {
    if !graph.is_unweighted() {
        return input("communicability distance requires an unweighted graph");
    }
    if !graph.is_connected() {
        return input("communicability distance requires a connected graph");
    }
    let g = graph.weight_matrix().spectral_map(f64::exp);
    Ok(SymmetricMatrix::from_fn(graph.n_vertices(), |k, l| {
        if k == l {
            0.0
        } else {
            (g.get(k, k) + g.get(l, l) - 2.0 * g.get(k, l)).max(0.0).sqrt()
        }
    }))
}

/// A graph together with the metric its vertices are measured with.
#[derive(Debug)]
pub struct GraphSpace {
    graph: Graph,
    metric: GraphMetric,
    distances: SymmetricMatrix,
}

impl GraphSpace {
    pub fn new(graph: Graph, metric: GraphMetric) -> Result<Self> {
        let distances = match metric {
            GraphMetric::ShortestPath => shortest_path_matrix(&graph),
            GraphMetric::SqrtResistance => resistance_distance_matrix(&graph)?.map(f64::sqrt),
            GraphMetric::Communicability => communicability_distance_matrix(&graph)?,
        };
        Ok(Self { graph, metric, distances })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn metric(&self) -> GraphMetric {
        self.metric
    }

    pub fn distances(&self) -> &SymmetricMatrix {
        &self.distances
    }
}

/// A point-hosting space.
#[derive(Clone, Debug)]
pub enum Space {
    Euclidean { dim: usize },
    Sphere { dim: usize, radius: f64 },
    Graph(Arc<GraphSpace>),
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Space::Euclidean { dim: a }, Space::Euclidean { dim: b }) => a == b,
            (Space::Sphere { dim: a, radius: r }, Space::Sphere { dim: b, radius: s }) => a == b && r == s,
            (Space::Graph(a), Space::Graph(b)) => Arc::ptr_eq(a, b) || (a.metric == b.metric && a.graph == b.graph),
            _ => false,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Euclidean { dim } => write!(f, "euclidean:{dim}"),
            Space::Sphere { dim, radius } => write!(f, "sphere:{dim}:{radius}"),
            Space::Graph(g) => {
                write!(f, "graph:{}:{}v/{}e", g.metric.name(), g.graph.n_vertices(), g.graph.edges().len())
            }
        }
    }
}

const SPHERE_RADIUS_RTOL: f64 = 1e-9;
const ARCCOS_TOL: f64 = 1e-12;
/// Continuous points closer than this are the same point (nugget case split).
pub const COINCIDENCE_TOL: f64 = 1e-12;

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return input("Euclidean dimension must be >= 1");
        }
        Ok(Space::Euclidean { dim })
    }

    pub fn sphere(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return input("sphere dimension must be >= 1");
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return input(format!("sphere radius must be positive, got {radius}"));
        }
        Ok(Space::Sphere { dim, radius })
    }

    pub fn graph(graph: Graph, metric: GraphMetric) -> Result<Self> {
        Ok(Space::Graph(Arc::new(GraphSpace::new(graph, metric)?)))
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (Space::Euclidean { dim }, Point::Coords(c)) => {
                if c.len() != *dim {
                    return input(format!("point has {} coordinates, space has dimension {dim}", c.len()));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return input("point has non-finite coordinates");
                }
                Ok(())
            }
            (Space::Sphere { dim, radius }, Point::Coords(c)) => {
                if c.len() != dim + 1 {
                    return input(format!("sphere point needs {} embedding coordinates, got {}", dim + 1, c.len()));
                }
                let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                if ((norm - radius) / radius).abs() > SPHERE_RADIUS_RTOL {
                    return input(format!("point with norm {norm} is off the sphere of radius {radius}"));
                }
                Ok(())
            }
            (Space::Graph(g), Point::Vertex(v)) => {
                if *v >= g.graph.n_vertices() {
                    return input(format!("vertex {v} out of range (graph has {})", g.graph.n_vertices()));
                }
                Ok(())
            }
            _ => input(format!("point kind does not match space {self}")),
        }
    }

    /// Distance between two points of the space.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.validate_point(x)?;
        self.validate_point(y)?;
        self.distance_unchecked(x, y)
    }

    fn distance_unchecked(&self, x: &Point, y: &Point) -> Result<f64> {
        match (self, x, y) {
            (Space::Euclidean { .. }, Point::Coords(a), Point::Coords(b)) => {
                Ok(a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
            }
            (Space::Sphere { radius, .. }, Point::Coords(a), Point::Coords(b)) => {
                if a == b {
                    return Ok(0.0);
                }
                let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
                let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
                let c = dot / (na * nb);
                if c.abs() > 1.0 + ARCCOS_TOL {
                    return input(format!("great-circle cosine {c} outside [-1, 1]"));
                }
                Ok(radius * c.clamp(-1.0, 1.0).acos())
            }
            (Space::Graph(g), Point::Vertex(a), Point::Vertex(b)) => Ok(g.distances.get(*a, *b)),
            _ => input(format!("point kind does not match space {self}")),
        }
    }

    /// Whether two points are the same point of the space: vertex equality on
    /// graphs, distance below [`COINCIDENCE_TOL`] otherwise.
    pub fn coincident(&self, x: &Point, y: &Point, distance: f64) -> bool {
        match (x, y) {
            (Point::Vertex(a), Point::Vertex(b)) => a == b,
            _ => distance < COINCIDENCE_TOL,
        }
    }

    pub fn distance_matrix(&self, points: &[Point]) -> Result<SymmetricMatrix> {
        for p in points {
            self.validate_point(p)?;
        }
        let mut out = SymmetricMatrix::zeros(points.len());
        for k in 0..points.len() {
            for l in 0..k {
                out.set(k, l, self.distance_unchecked(&points[k], &points[l])?);
            }
        }
        Ok(out)
    }

    /// Draws `n` points: uniform in `[0, extent]^N`, uniform on the sphere, or
    /// uniform vertices of the graph.
    pub fn random_points(&self, n: usize, extent: f64, rng: &mut impl Rng) -> Vec<Point> {
        (0..n)
            .map(|_| match self {
                Space::Euclidean { dim } => Point::Coords((0..*dim).map(|_| rng.random::<f64>() * extent).collect()),
                Space::Sphere { dim, radius } => Point::Coords(random_on_sphere(*dim, *radius, rng)),
                Space::Graph(g) => Point::Vertex(rng.random_range(0..g.graph.n_vertices())),
            })
            .collect()
    }
}

/// Uniform point on `S^dim(radius)` via normalized Gaussian coordinates.
pub fn random_on_sphere(dim: usize, radius: f64, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..=dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x * radius / norm).collect();
        }
    }
}

/// Outcome of the sphere distance-matrix test.
#[derive(Clone, Debug, Serialize)]
pub struct SphereGramDiagnostics {
    pub valid: bool,
    /// Spectrum of `r² cos(D/r)`, ascending.
    pub eigenvalues: Vec<f64>,
    pub numerical_rank: usize,
    pub tolerance: f64,
}

/// Decides whether `d` is the great-circle distance matrix of points of
/// `S^dim(radius)`: `r² cos(D/r)` must be positive semidefinite with rank at
/// most `dim + 1`.
pub fn validate_sphere_distance_matrix(d: &SymmetricMatrix, dim: usize, radius: f64) -> Result<SphereGramDiagnostics> {
    if dim == 0 || !(radius > 0.0) {
        return input("sphere dimension must be >= 1 and radius > 0");
    }
    let n = d.n();
    let max_d = PI * radius;
    for k in 0..n {
        if d.get(k, k) != 0.0 {
            return input(format!("diagonal entry ({k}, {k}) is not zero"));
        }
        for l in 0..k {
            let v = d.get(k, l);
            if !(v >= 0.0 && v <= max_d * (1.0 + 1e-12)) {
                return input(format!("entry ({k}, {l}) = {v} outside [0, πr]"));
            }
        }
    }
    let gram = d.map(|v| radius * radius * (v / radius).cos());
    let eigenvalues = gram.eigen().values;
    let norm = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = 1e-9 * norm;
    let numerical_rank = eigenvalues.iter().filter(|&&v| v > tolerance).count();
    let min = eigenvalues.first().copied().unwrap_or(0.0);
    Ok(SphereGramDiagnostics {
        valid: min >= -tolerance && numerical_rank <= dim + 1,
        eigenvalues,
        numerical_rank,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSpec;

    fn path3(w1: f64, w2: f64) -> Graph {
        Graph::new(3, [(0, 1, w1), (1, 2, w2)]).unwrap()
    }

    fn k3() -> Graph {
        Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn euclidean_three_four_five() {
        let s = Space::euclidean(2).unwrap();
        let d = s.distance(&vec![0.0, 0.0].into(), &vec![3.0, 4.0].into()).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn sphere_antipodal_is_pi() {
        let s = Space::sphere(2, 1.0).unwrap();
        let d = s.distance(&vec![0.0, 0.0, 1.0].into(), &vec![0.0, 0.0, -1.0].into()).unwrap();
        assert!((d - PI).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_and_off_sphere_rejected() {
        let e = Space::euclidean(2).unwrap();
        assert!(e.distance(&vec![0.0].into(), &vec![1.0, 0.0].into()).is_err());
        let s = Space::sphere(2, 2.0).unwrap();
        assert!(s.distance(&vec![1.0, 0.0, 0.0].into(), &vec![2.0, 0.0, 0.0].into()).is_err());
        assert!(e.distance(&Point::Vertex(0), &Point::Vertex(1)).is_err());
    }

    #[test]
    fn shortest_path_sums_weights() {
        let s = Space::graph(path3(1.0, 2.0), GraphMetric::ShortestPath).unwrap();
        assert_eq!(s.distance(&Point::Vertex(0), &Point::Vertex(2)).unwrap(), 3.0);
    }

    #[test]
    fn shortest_path_disconnected_is_infinite() {
        let g = Graph::new(3, [(0, 1, 1.0)]).unwrap();
        let sp = shortest_path_matrix(&g);
        assert_eq!(sp.get(0, 2), f64::INFINITY);
        assert_eq!(sp.get(0, 1), 1.0);
    }

    #[test]
    fn resistance_series_and_single_edge() {
        let r = resistance_distance_matrix(&path3(1.0, 1.0)).unwrap();
        assert!((r.get(0, 2) - 2.0).abs() < 1e-12);
        let single = Graph::new(2, [(0, 1, 4.0)]).unwrap();
        assert!((resistance_distance_matrix(&single).unwrap().get(0, 1) - 0.25).abs() < 1e-12);
        let r2 = resistance_distance_matrix(&path3(2.0, 0.5)).unwrap();
        assert!((r2.get(0, 2) - (0.5 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn resistance_of_triangle() {
        // Oracle: L = 3I - J on K3, L⁺ = (I - J/3)/3, so d = 2/3 for any pair.
        let r = resistance_distance_matrix(&k3()).unwrap();
        for (k, l) in [(0, 1), (0, 2), (1, 2)] {
            assert!((r.get(k, l) - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn resistance_rejects_disconnected() {
        let g = Graph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(resistance_distance_matrix(&g).is_err());
    }

    #[test]
    fn communicability_k2() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let c = communicability_distance_matrix(&g).unwrap();
        let want = (2.0 / std::f64::consts::E).sqrt();
        assert!((c.get(0, 1) - want).abs() < 1e-12);
        assert!((want - 0.857_764).abs() < 1e-6);
        assert_eq!(c.get(0, 0), 0.0);
    }

    #[test]
    fn communicability_k3() {
        // A = J - I has eigenvalue 2 on 1/√3 and -1 on its complement:
        // exp(A) = e² J/3 + e⁻¹ (I - J/3), so d² = 2 e⁻¹.
        let c = communicability_distance_matrix(&k3()).unwrap();
        let want = (2.0 / std::f64::consts::E).sqrt();
        assert!((c.get(0, 1) - want).abs() < 1e-12);
    }

    #[test]
    fn communicability_rejects_weights() {
        assert!(communicability_distance_matrix(&path3(1.0, 2.0)).is_err());
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(3, [(0, 0, 1.0)]).is_err());
        assert!(Graph::new(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(Graph::new(3, [(0, 1, 0.0)]).is_err());
        assert!(Graph::new(3, [(0, 3, 1.0)]).is_err());
    }

    #[test]
    fn edge_list_parsing() {
        let g = Graph::parse_edge_list("# path\n3\n0 1 1.0\n1 2 2 # heavy\n\n").unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.edges()[1].weight, 2.0);
        match Graph::parse_edge_list("3\n0 x 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    fn cyclic(n: usize, step: f64) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(n, |k, l| if k == l { 0.0 } else { step })
    }

    #[test]
    fn sphere_gram_three_points_on_circle() {
        let d = cyclic(3, 2.0 * PI / 3.0);
        let diag = validate_sphere_distance_matrix(&d, 1, 1.0).unwrap();
        assert!(diag.valid);
        assert!(diag.eigenvalues[0].abs() < 1e-12);
        assert!((diag.eigenvalues[1] - 1.5).abs() < 1e-12);
        assert!((diag.eigenvalues[2] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn sphere_gram_four_points_impossible() {
        let d = cyclic(4, 2.0 * PI / 3.0);
        for dim in 1..5 {
            let diag = validate_sphere_distance_matrix(&d, dim, 1.0).unwrap();
            assert!(!diag.valid);
            assert!((diag.eigenvalues[0] + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_gram_zero_matrix_and_range_error() {
        assert!(validate_sphere_distance_matrix(&SymmetricMatrix::zeros(4), 2, 1.0).unwrap().valid);
        assert!(validate_sphere_distance_matrix(&cyclic(3, 4.0), 2, 1.0).is_err());
    }

    #[test]
    fn sphere_gram_round_trip_and_rank() {
        let mut rng = RngSpec::new(11).rng();
        let s = Space::sphere(2, 3.0).unwrap();
        let pts = s.random_points(8, 1.0, &mut rng);
        let d = s.distance_matrix(&pts).unwrap();
        assert!(validate_sphere_distance_matrix(&d, 2, 3.0).unwrap().valid);
        // Eight generic points on S² need rank 3, so S¹ must reject them.
        assert!(!validate_sphere_distance_matrix(&d, 1, 3.0).unwrap().valid);
    }
}
