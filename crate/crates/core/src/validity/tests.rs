use super::*;
use crate::models::tests::catalog;
use crate::models::NuggetCovariance;
use crate::spaces::{Graph, GraphMetric};
use rand::Rng;

fn line() -> Space {
    Space::euclidean(1).unwrap()
}

fn pts(xs: &[f64]) -> Vec<Point> {
    xs.iter().map(|&x| Point::from(vec![x])).collect()
}

fn matrix(n: usize, off: &[f64]) -> Configuration {
    let mut g = SymmetricMatrix::zeros(n);
    let mut it = off.iter();
    for k in 0..n {
        for l in k + 1..n {
            g.set(k, l, *it.next().unwrap());
        }
    }
    Configuration::from_matrix(g).unwrap()
}

fn gaussian_variogram_triple() -> Configuration {
    let gv = |h: f64| 1.0 - (-h * h).exp();
    matrix(3, &[gv(0.1), gv(0.2), gv(0.1)])
}

fn verdict(e: &CheckEntry) -> Verdict {
    assert_fail_certificate(e, None);
    e.verdict
}

fn assert_fail_certificate(e: &CheckEntry, cfg: Option<&Configuration>) {
    if e.verdict == Verdict::Fail {
        let cert = e.certificate.as_ref().expect("fail carries a certificate");
        if let Some(cfg) = cfg {
            let m = cert.margin(&cfg.g);
            assert!(m > 0.0, "{}: certificate margin {m}", e.check);
            assert!((m - e.margin.unwrap()).abs() < 1e-12, "{}: {m} vs {:?}", e.check, e.margin);
        }
    }
}

#[test]
fn gamma_matrix_examples() {
    let m = VariogramModel::exponential(1.0, 1.0, line()).unwrap();
    let same = gamma_matrix(&m, &pts(&[1.5, 1.5])).unwrap();
    assert_eq!(same.g.max_abs(), 0.0);
    let cfg = gamma_matrix(&m, &pts(&[0.0, 1.0, 2.0])).unwrap();
    let a = (1.0 - (-1.0f64).exp()) / 4.0;
    assert!((cfg.g.get(0, 1) - a).abs() < 1e-15);
    assert!((cfg.g.get(0, 1) - 0.158031).abs() < 1e-6);
    assert!((cfg.g.get(0, 2) - 0.216166).abs() < 1e-6);
    assert!((cfg.g.get(1, 2) - 0.158031).abs() < 1e-6);

    let nug = VariogramModel::nugget(NuggetCovariance::Constant(0.5), 1.0, line()).unwrap();
    let cfg = gamma_matrix(&nug, &pts(&[0.0, 0.3, 2.0])).unwrap();
    for (k, l) in [(0, 1), (0, 2), (1, 2)] {
        assert!((cfg.g.get(k, l) - 0.125).abs() < 1e-15);
    }

    let circle = Space::sphere(1, 1.0).unwrap();
    assert!(gamma_matrix(&m, &[Point::from(vec![1.0, 0.0]), Point::from(vec![0.0, 1.0])]).is_err());
    assert!(gamma_matrix(&VariogramModel::sphere_linear(1.0, circle).unwrap(), &pts(&[0.0, 1.0])).is_err());
}

#[test]
fn negative_type_examples() {
    assert_eq!(verdict(&check_negative_type(&matrix(2, &[0.4]))), Verdict::Pass);
    assert_eq!(check_negative_type(&gaussian_variogram_triple()).verdict, Verdict::Pass);
    let bad = matrix(3, &[1.0, 0.01, 0.01]);
    let e = check_negative_type(&bad);
    assert_eq!(e.verdict, Verdict::Fail);
    assert_fail_certificate(&e, Some(&bad));
    if let Some(Certificate::RealWeights { lambda }) = &e.certificate {
        assert!(lambda.iter().sum::<f64>().abs() < 1e-12);
    } else {
        panic!("expected real weights");
    }
}

#[test]
fn pointwise_examples() {
    let boundary = crate::models::median_indicator_value(-1.0).unwrap();
    let e = check_pointwise(&matrix(2, &[boundary]));
    assert_eq!(e.verdict, Verdict::Pass);
    assert_eq!(e.margin, Some(0.0));
    let e = check_pointwise(&matrix(3, &[0.1, 0.5 + 1e-6, 0.2]));
    assert_eq!(e.verdict, Verdict::Fail);
    match e.certificate {
        Some(Certificate::Entry { k: 0, l: 2, value }) => assert_eq!(value, 0.5 + 1e-6),
        c => panic!("{c:?}"),
    }
    assert_eq!(check_pointwise(&matrix(3, &[0.0, 0.0, 0.0])).verdict, Verdict::Pass);
}

#[test]
fn polygonal_examples() {
    let cfg = gaussian_variogram_triple();
    let e = check_polygonal(&cfg, 0);
    assert_eq!(e.verdict, Verdict::Fail);
    assert_fail_certificate(&e, Some(&cfg));
    assert!((e.margin.unwrap() - 2.0 * (0.039211 - 0.019900)).abs() < 1e-5);

    let m = VariogramModel::exponential(1.0, 1.0, line()).unwrap();
    let cfg = gamma_matrix(&m, &pts(&[0.0, 0.7, 3.1])).unwrap();
    assert_eq!(check_polygonal(&cfg, 0).verdict, Verdict::Pass);
    assert_eq!(check_polygonal(&matrix(3, &[0.3, 0.3, 0.3]), 0).verdict, Verdict::Pass);
    assert_eq!(check_polygonal(&matrix(2, &[0.3]), 0).verdict, Verdict::Skipped);
}

#[test]
fn polygonal_sampling_beyond_twelve_points() {
    let m = VariogramModel::exponential(1.0, 1.0, line()).unwrap();
    let xs: Vec<f64> = (0..15).map(|i| i as f64 * 0.37).collect();
    let cfg = gamma_matrix(&m, &pts(&xs)).unwrap();
    let e = check_polygonal(&cfg, 9);
    assert_eq!(e.verdict, Verdict::PassSampled);
    assert_eq!(e.bounds.candidates, Some(455 * 3 + POLYGONAL_SAMPLES as u64));

    let mut g = cfg.g.clone();
    g.set(0, 14, 0.0);
    g.set(0, 1, 0.4);
    let bad = Configuration::from_matrix(g).unwrap();
    let e = check_polygonal(&bad, 9);
    assert_eq!(e.verdict, Verdict::Fail);
    assert_fail_certificate(&e, Some(&bad));
}

#[test]
fn integer_weight_examples() {
    let half = matrix(3, &[0.5, 0.5, 0.5]);
    let mat = check_integer_weights(&half, WeightFamily::Matheron, 1).unwrap();
    assert_eq!(mat.verdict, Verdict::Pass);
    let w = [1.0, 1.0, -1.0];
    assert!((half.g.quad_form(&w) + 1.0).abs() < 1e-15);
    let odd = check_integer_weights(&half, WeightFamily::OddClique, 1).unwrap();
    assert_eq!(odd.verdict, Verdict::Fail);
    assert_fail_certificate(&odd, Some(&half));
    assert!((half.g.quad_form(&[1.0; 3]) - 3.0).abs() < 1e-15);

    let m = VariogramModel::exponential(1.0, 1.0, line()).unwrap();
    let cfg = gamma_matrix(&m, &pts(&[0.0, 2.5])).unwrap();
    assert_eq!(check_integer_weights(&cfg, WeightFamily::Psd, 3).unwrap().verdict, Verdict::Pass);

    let third = matrix(3, &[1.0 / 3.0; 3]);
    assert_eq!(check_integer_weights(&third, WeightFamily::Shepp, 1).unwrap().verdict, Verdict::Pass);
    let e = check_integer_weights(&matrix(4, &[0.1; 6]), WeightFamily::Shepp, 1).unwrap();
    assert_eq!(e.verdict, Verdict::Skipped);
    assert!(check_integer_weights(&third, WeightFamily::Psd, 0).is_err());
}

#[test]
fn enumeration_limit_skips() {
    let n = 10;
    let cfg = Configuration::from_matrix(SymmetricMatrix::from_fn(n, |k, l| if k == l { 0.0 } else { 0.1 })).unwrap();
    let e = check_integer_weights(&cfg, WeightFamily::Hypermetric, 3).unwrap();
    assert_eq!(e.verdict, Verdict::Skipped);
    assert!(e.bounds.note.as_ref().unwrap().contains("enumeration limit"));
    let e = check_integer_weights(&cfg, WeightFamily::Matheron, 3).unwrap();
    assert_eq!(e.verdict, Verdict::Pass);
    assert_eq!(e.bounds.weight_bound, Some(1));
}

#[test]
fn gap_family_examples() {
    let cfg = matrix(2, &[0.0]);
    let e = check_gap(&cfg, 2).unwrap();
    assert_eq!(e.verdict, Verdict::Pass);
    assert!(e.margin.unwrap().abs() < 1e-15, "binds at g12 = 0: {:?}", e.margin);
    let half = matrix(3, &[0.5, 0.5, 0.5]);
    let e = check_gap(&half, 1).unwrap();
    assert_eq!(e.verdict, Verdict::Fail);
    assert_fail_certificate(&e, Some(&half));
    assert!((e.margin.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn realizability_examples() {
    assert!(matches!(realizability_small(&SymmetricMatrix::zeros(3)).unwrap(), Realizability::Feasible { .. }));
    assert!(matches!(realizability_small(&matrix(3, &[0.5; 3]).g).unwrap(), Realizability::Infeasible { .. }));
    let gaussian = gaussian_variogram_triple().g.map(|v| v / 4.0);
    let e = check_realizability(&Configuration::from_matrix(gaussian.clone()).unwrap()).unwrap();
    assert_eq!(e.verdict, Verdict::Fail);
    assert!(e.certificate.unwrap().margin(&gaussian) > 0.0);
    let m = VariogramModel::exponential(1.0, 1.0, line()).unwrap();
    let cfg = gamma_matrix(&m, &pts(&[0.0, 1.0, 2.0])).unwrap();
    assert_eq!(check_realizability(&cfg).unwrap().verdict, Verdict::Pass);
}

#[test]
fn report_json_and_table() {
    let cfg = gaussian_variogram_triple();
    let report = check_all(&cfg, &CheckOptions::default()).unwrap();
    assert!(!report.all_pass());
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    let arr = json.as_array().unwrap();
    assert_eq!(arr.len(), 11);
    for e in arr {
        for key in ["check", "verdict", "margin", "certificate", "bounds"] {
            assert!(e.get(key).is_some(), "{key} missing in {e}");
        }
    }
    let poly = report.get("polygonal").unwrap();
    assert_eq!(poly.verdict, Verdict::Fail);
    let table = report.table();
    assert!(table.contains("polygonal") && table.contains("fail"));
}

#[test]
fn shared_sweep_matches_single_family_runs() {
    let mut rng = RngSpec::new(17).rng();
    for _ in 0..5 {
        let n = 5;
        let g = SymmetricMatrix::from_fn(n, |k, l| if k == l { 0.0 } else { rng.random_range(0.0..0.5) });
        let cfg = Configuration::from_matrix(g).unwrap();
        let report = check_all(&cfg, &CheckOptions { realizability: false, ..CheckOptions::default() }).unwrap();
        for f in INDICATOR_FAMILIES {
            let single = check_integer_weights(&cfg, f, DEFAULT_BOUND).unwrap();
            let shared = report.get(f.name()).unwrap();
            assert_eq!(single.verdict, shared.verdict, "{}", f.name());
            assert_eq!(single.bounds.candidates, shared.bounds.candidates, "{}", f.name());
            match (single.margin, shared.margin) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12, "{}", f.name()),
                (a, b) => assert_eq!(a, b),
            }
        }
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let mut rng = RngSpec::new(3).rng();
    let n = 6;
    let g = SymmetricMatrix::from_fn(n, |k, l| if k == l { 0.0 } else { rng.random_range(0.0..0.5) });
    let cfg = Configuration::from_matrix(g).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| check_all(&cfg, &CheckOptions::default()).unwrap().to_json())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn madogram_profile() {
    // √(γ/π) of a valid variogram is a valid madogram, though it exceeds ½.
    let gv = |h: f64| 40.0 * h.abs();
    let xs = [0.0, 0.4, 1.1, 2.0];
    let n = xs.len();
    let g = SymmetricMatrix::from_fn(n, |k, l| (gv(xs[k] - xs[l]) / std::f64::consts::PI).sqrt());
    let cfg = Configuration::from_matrix(g).unwrap();
    assert!(cfg.g.max_abs() > 0.5);
    let mado = check_all(&cfg, &CheckOptions { profile: Profile::Madogram, ..CheckOptions::default() }).unwrap();
    let names: Vec<&str> = mado.entries.iter().map(|e| e.check.as_str()).collect();
    assert_eq!(names, ["negative_type", "polygonal", "odd_clique", "hypermetric"]);
    assert!(mado.all_pass(), "{}", mado.table());
    let ind = check_all(&cfg, &CheckOptions::default()).unwrap();
    assert_eq!(ind.get("pointwise").unwrap().verdict, Verdict::Fail);
}

fn random_valid_configuration(rng: &mut impl Rng, i: usize) -> Configuration {
    let hosts = [
        Space::euclidean(1).unwrap(),
        Space::euclidean(2).unwrap(),
        Space::sphere(2, 1.0).unwrap(),
        Space::graph(
            Graph::new(6, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 2.0), (3, 4, 1.0), (4, 5, 1.0), (5, 0, 0.5), (1, 4, 1.0)])
                .unwrap(),
            GraphMetric::SqrtResistance,
        )
        .unwrap(),
    ];
    let host = &hosts[i % hosts.len()];
    let models = catalog(host);
    let model = &models[rng.random_range(0..models.len())];
    let n = rng.random_range(3..=7);
    let points = host.random_points(n, 2.0, rng);
    gamma_matrix(model, &points).unwrap()
}

fn assert_chain(cfg: &Configuration, label: &str) {
    let report = check_all(cfg, &CheckOptions::default()).unwrap();
    for e in &report.entries {
        assert_fail_certificate(e, Some(cfg));
    }
    let real = report.get("realizability").unwrap().verdict;
    let any_fail = report.entries.iter().any(|e| e.check != "realizability" && e.verdict == Verdict::Fail);
    if real == Verdict::Pass {
        assert!(!any_fail, "{label}: realizable but a family fails\n{}", report.table());
    }
    if any_fail {
        assert_eq!(real, Verdict::Fail, "{label}: family failure but realizable\n{}", report.table());
    }
    // rounded psd implies the weaker families on the same range
    if report.get("rounded_psd").unwrap().verdict == Verdict::Pass {
        for name in ["polygonal", "odd_clique", "hypermetric", "psd"] {
            let v = report.get(name).unwrap().verdict;
            assert_ne!(v, Verdict::Fail, "{label}: rounded_psd passes but {name} fails");
        }
    }
}

#[test]
fn implication_chain_on_valid_models() {
    let mut rng = RngSpec::new(2024).rng();
    for i in 0..100 {
        let cfg = random_valid_configuration(&mut rng, i);
        let report = check_all(&cfg, &CheckOptions::default()).unwrap();
        assert!(report.all_pass(), "valid model fails on configuration {i}\n{}", report.table());
        assert_chain(&cfg, &format!("valid {i}"));
    }
}

#[test]
fn implication_chain_on_perturbed_configurations() {
    let mut rng = RngSpec::new(77).rng();
    let mut failures = 0;
    for i in 0..100 {
        let base = random_valid_configuration(&mut rng, i);
        let n = base.n();
        let g = SymmetricMatrix::from_fn(n, |k, l| {
            if k == l {
                0.0
            } else {
                (base.g.get(k, l) + rng.random_range(-0.15..0.15)).clamp(0.0, 0.6)
            }
        });
        let cfg = Configuration::from_matrix(g).unwrap();
        assert_chain(&cfg, &format!("perturbed {i}"));
        if check_realizability(&cfg).unwrap().verdict == Verdict::Fail {
            failures += 1;
        }
    }
    assert!(failures > 10, "perturbation too mild: {failures} infeasible");
}

#[test]
fn resistance_metric_has_negative_type() {
    let graph = Graph::new(5, [(0, 1, 1.0), (1, 2, 3.0), (2, 3, 1.0), (3, 4, 0.5), (4, 0, 1.0), (0, 2, 2.0)]).unwrap();
    let space = Space::graph(graph, GraphMetric::SqrtResistance).unwrap();
    let pts: Vec<Point> = (0..5).map(Point::Vertex).collect();
    let d = space.distance_matrix(&pts).unwrap();
    let sq = Configuration::from_matrix(d.map(|v| v * v)).unwrap();
    assert_eq!(check_negative_type(&sq).verdict, Verdict::Pass);
}
