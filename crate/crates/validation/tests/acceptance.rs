//! Acceptance suite. Every criterion prints one line, PASS or FAIL, and the
//! test fails if any criterion does. Tolerances and runtime limits are the
//! constants below.
//!
//! Run with `cargo test -p tdabm-validation -- --nocapture` to see the lines.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tdabm::graph::{ball_summary, coloring_above, filter_by, points_and_balls, BallGraph};
use tdabm::ingest::{summary_stats, ColoringVariable, PointCloud};
use tdabm::layout::{spring_layout, Layout, LayoutConfig};
use tdabm::render::{export_dot, export_json, import_json, render_svg, GraphDocument, RenderConfig};
use tdabm::stability::{ball_count_distribution, parse_claim, run_stability};
use tdabm::stats::pearson;
use tdabm::{build_cover, build_graph, Cover, CoverConfig};
use tdabm_validation::{brute_force_edges, close, cover_oracle, load_fixture, Report};

const TABLE_TOL: f64 = 1e-3;
const CORR_TOL: f64 = 2e-3;
const FIXTURE_EPS: f64 = 1.5;
const CORPUS_SIZE: usize = 200;
const ROUND_TRIP_GRAPHS: usize = 100;
const STABILITY_REPS: usize = 100;
const STABILITY_BASE_SEED: u64 = 0;
const STABILITY_SUPPORT: (usize, usize) = (5, 12);

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

/// Reference whole-sample summary, by column: mean, sd, min, 25%, 50%, 75%, max.
const SAMPLE_SUMMARY: [(&str, &str, [f64; 7]); 6] = [
    (
        "dataset1.csv",
        "X1",
        [0.000, 1.000, -1.738, -0.833, -0.028, 0.844, 1.753],
    ),
    (
        "dataset1.csv",
        "X2",
        [0.000, 1.000, -1.749, -0.852, 0.032, 0.859, 1.734],
    ),
    ("dataset1.csv", "Y", [0.000, 1.418, -3.244, -0.988, 0.019, 1.027, 3.400]),
    (
        "dataset2.csv",
        "X1",
        [0.000, 1.000, -1.738, -0.833, -0.028, 0.844, 1.753],
    ),
    (
        "dataset2.csv",
        "X2",
        [0.000, 0.999, -2.335, -0.774, 0.051, 0.723, 2.308],
    ),
    ("dataset2.csv", "Y", [0.000, 1.002, -2.240, -0.761, 0.009, 0.713, 2.339]),
];

/// Reference per-ball summary, dataset 1: per ball, (mean, sd, min, max) of X1, X2, Y, then Obs.
const BALL_SUMMARY: [([[f64; 4]; 3], usize); 7] = [
    (
        [
            [0.085, 0.772, -1.429, 1.542],
            [0.672, 0.617, -0.531, 1.734],
            [-0.587, 0.995, -2.768, 1.255],
        ],
        485,
    ),
    (
        [
            [-1.028, 0.438, -1.738, -0.180],
            [-0.340, 0.746, -1.748, 1.113],
            [-0.688, 0.880, -2.784, 0.811],
        ],
        307,
    ),
    (
        [
            [0.826, 0.554, -0.314, 1.748],
            [-1.012, 0.454, -1.748, -0.182],
            [1.838, 0.614, 0.759, 3.400],
        ],
        225,
    ),
    (
        [
            [0.931, 0.505, -0.082, 1.753],
            [0.044, 0.750, -1.451, 1.487],
            [0.887, 0.893, -0.687, 3.086],
        ],
        380,
    ),
    (
        [
            [-0.985, 0.487, -1.738, -0.112],
            [0.991, 0.451, 0.002, 1.707],
            [-1.976, 0.587, -3.244, -0.915],
        ],
        209,
    ),
    (
        [
            [0.971, 0.492, -0.069, 1.753],
            [1.076, 0.407, 0.294, 1.734],
            [-0.105, 0.697, -1.734, 1.365],
        ],
        176,
    ),
    (
        [
            [-0.373, 0.723, -1.736, 1.059],
            [-1.065, 0.414, -1.749, -0.195],
            [0.693, 0.857, -0.814, 2.639],
        ],
        306,
    ),
];

const DATASET_2_SIZES: [usize; 5] = [503, 309, 307, 199, 280];

/// Random clouds with N <= 500, K <= 5 and eps in [0.1, 3]. Every fourth
/// instance sits on an integer lattice with integer eps so that many
/// distances equal eps exactly, and every fourth has heavy duplication.
fn corpus() -> Vec<(PointCloud, f64)> {
    (0..CORPUS_SIZE)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + i as u64);
            let n = rng.random_range(1..=500);
            let k = rng.random_range(1..=5);
            let mut eps = rng.random_range(0.1..=3.0);
            let rows: Vec<Vec<f64>> = match i % 4 {
                0 => (0..n)
                    .map(|_| (0..k).map(|_| rng.random_range(-3.0..3.0)).collect())
                    .collect(),
                1 => (0..n)
                    .map(|_| {
                        let centre = rng.random_range(0..3) as f64 * 4.0;
                        (0..k).map(|_| centre + rng.random_range(-1.0..1.0)).collect()
                    })
                    .collect(),
                2 => {
                    eps = rng.random_range(1..=3) as f64;
                    (0..n)
                        .map(|_| (0..k).map(|_| rng.random_range(-4..=4) as f64).collect())
                        .collect()
                }
                _ => {
                    let pool: Vec<Vec<f64>> = (0..10)
                        .map(|_| (0..k).map(|_| rng.random_range(-2.0..2.0)).collect())
                        .collect();
                    (0..n).map(|_| pool[rng.random_range(0..pool.len())].clone()).collect()
                }
            };
            let names = (1..=k).map(|j| format!("X{j}")).collect();
            (PointCloud::new(rows, names).expect("corpus cloud"), eps)
        })
        .collect()
}

fn covers_of(cloud: &PointCloud, eps: f64, seed: u64) -> [(bool, Cover); 2] {
    [
        (true, build_cover(cloud, &CoverConfig::sequential(eps)).unwrap()),
        (false, build_cover(cloud, &CoverConfig::random(eps, seed)).unwrap()),
    ]
}

fn random_coloring(cloud: &PointCloud, seed: u64) -> ColoringVariable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..cloud.n())
        .map(|_| {
            let mantissa: f64 = rng.random_range(-1.0..1.0);
            mantissa * 10f64.powi(rng.random_range(-30..30))
        })
        .collect();
    ColoringVariable::new("C", values).unwrap()
}

fn fixture_graph() -> (PointCloud, ColoringVariable, Cover, BallGraph) {
    let (cloud, y) = load_fixture("dataset1.csv");
    let cover = build_cover(&cloud, &CoverConfig::sequential(FIXTURE_EPS)).unwrap();
    let graph = build_graph(&cover, &y).unwrap();
    (cloud, y, cover, graph)
}

fn sample_summary() -> Result<String, String> {
    let mut bad = Vec::new();
    let mut cached: BTreeMap<&str, tdabm::ingest::SummaryTable> = BTreeMap::new();
    for (file, column, want) in SAMPLE_SUMMARY {
        let table = cached.entry(file).or_insert_with(|| {
            let (cloud, y) = load_fixture(file);
            summary_stats(&cloud, &[y]).unwrap()
        });
        let s = table.get(column).ok_or(format!("no column {column}"))?;
        let got = [s.mean, s.sd, s.min, s.q25, s.median, s.q75, s.max];
        for ((stat, g), w) in ["mean", "sd", "min", "25%", "50%", "75%", "max"]
            .iter()
            .zip(got)
            .zip(want)
        {
            if let Err(e) = close(&format!("{file} {column} {stat}"), g, w, TABLE_TOL) {
                bad.push(e);
            }
        }
    }
    if bad.is_empty() {
        Ok("all 42 cells within 1e-3".into())
    } else {
        Err(format!("{} of 42 cells off: {}", bad.len(), bad.join("; ")))
    }
}

fn correlation() -> Result<String, String> {
    let (cloud, _) = load_fixture("dataset2.csv");
    let r = pearson(&cloud.column(0), &cloud.column(1));
    close("corr(X1, X2)", r, 0.496, CORR_TOL)?;
    Ok(format!("r = {r:.6}"))
}

fn fixture_covers() -> Result<String, String> {
    let mut lines = Vec::new();
    for (file, want) in [
        ("dataset1.csv", BALL_SUMMARY.map(|r| r.1).to_vec()),
        ("dataset2.csv", DATASET_2_SIZES.to_vec()),
    ] {
        let (cloud, _) = load_fixture(file);
        let cover = build_cover(&cloud, &CoverConfig::sequential(FIXTURE_EPS)).unwrap();
        let sizes = cover.sizes();
        if sizes != want {
            return Err(format!("{file}: sizes {sizes:?}, expected {want:?}"));
        }
        lines.push(format!("{file}: {} balls {sizes:?}", cover.len()));
    }
    Ok(lines.join("; "))
}

fn per_ball_summary() -> Result<String, String> {
    let (cloud, y, cover, _) = fixture_graph();
    let summary = ball_summary(&cover, &cloud, &[y]).unwrap();
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (ball, (cells, obs)) in BALL_SUMMARY.iter().enumerate() {
        let row = &summary.rows[ball];
        if row.obs != *obs {
            bad.push(format!("ball {ball} obs {} vs {obs}", row.obs));
        }
        for (var, want) in ["X1", "X2", "Y"].iter().zip(cells) {
            let s = summary.get(ball, var).ok_or(format!("no {var} for ball {ball}"))?;
            for ((stat, got), w) in ["mean", "sd", "min", "max"]
                .iter()
                .zip([s.mean, s.sd, s.min, s.max])
                .zip(want)
            {
                worst = worst.max((got - w).abs());
                if let Err(e) = close(&format!("ball {ball} {var} {stat}"), got, *w, TABLE_TOL) {
                    bad.push(e);
                }
            }
        }
    }
    if bad.is_empty() {
        Ok(format!("84 cells and 7 counts match; worst deviation {worst:.5}"))
    } else {
        Err(bad.join("; "))
    }
}

fn topology() -> Result<String, String> {
    let (_, _, _, graph) = fixture_graph();
    let clique = [0, 2, 3, 6];
    for (i, &a) in clique.iter().enumerate() {
        for &b in &clique[i + 1..] {
            if !graph.has_edge(a, b) {
                return Err(format!("no edge {a}-{b}"));
            }
        }
    }
    if graph.has_edge(4, 6) {
        return Err("edge 4-6 present".into());
    }
    Ok(format!(
        "{{0,2,3,6}} pairwise adjacent, no 4-6 edge ({} edges)",
        graph.edges().len()
    ))
}

fn filter_positive() -> Result<String, String> {
    let (_, _, _, graph) = fixture_graph();
    let kept: Vec<usize> = filter_by(&graph, coloring_above("Y", 0.0))
        .nodes()
        .iter()
        .map(|n| n.id)
        .collect();
    if kept == [2, 3, 6] {
        Ok("kept [2, 3, 6]".into())
    } else {
        Err(format!("kept {kept:?}"))
    }
}

fn cover_suite(corpus: &[(PointCloud, f64)]) -> Result<String, String> {
    let mut checked = 0;
    for (i, (cloud, eps)) in corpus.iter().enumerate() {
        for (sequential, cover) in covers_of(cloud, *eps, i as u64) {
            let policy = if sequential { "sequential" } else { "random" };
            cover_oracle(cloud, &cover, sequential).map_err(|e| format!("instance {i} ({policy}): {e}"))?;
            let again = if sequential {
                build_cover(cloud, &CoverConfig::sequential(*eps)).unwrap()
            } else {
                build_cover(cloud, &CoverConfig::random(*eps, i as u64)).unwrap()
            };
            if again != cover {
                return Err(format!("instance {i} ({policy}): rebuild differs"));
            }
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} covers over {} clouds agree with brute force",
        corpus.len()
    ))
}

fn edge_suite(corpus: &[(PointCloud, f64)]) -> Result<String, String> {
    let mut edges = 0;
    for (i, (cloud, eps)) in corpus.iter().enumerate() {
        for (_, cover) in covers_of(cloud, *eps, i as u64) {
            let graph = BallGraph::from_cover(&cover);
            let got: BTreeMap<(usize, usize), usize> =
                graph.edges().iter().map(|e| ((e.a, e.b), e.intersection)).collect();
            if got != brute_force_edges(&cover) {
                return Err(format!("instance {i}: edge sets differ"));
            }
            edges += got.len();
        }
    }
    Ok(format!("{edges} edges with intersection counts match"))
}

fn points_and_balls_rows(corpus: &[(PointCloud, f64)]) -> Result<String, String> {
    for (i, (cloud, eps)) in corpus.iter().enumerate() {
        for (_, cover) in covers_of(cloud, *eps, i as u64) {
            let total: usize = cover.sizes().iter().sum();
            let rows = points_and_balls(&cover).len();
            if rows != total {
                return Err(format!("instance {i}: {rows} rows, sizes sum to {total}"));
            }
        }
    }
    let mut found = Vec::new();
    for (file, want) in [("dataset1.csv", 2088), ("dataset2.csv", 1598)] {
        let (cloud, _) = load_fixture(file);
        let cover = build_cover(&cloud, &CoverConfig::sequential(FIXTURE_EPS)).unwrap();
        let rows = points_and_balls(&cover).len();
        if rows != want {
            return Err(format!("{file}: {rows} rows, expected {want}"));
        }
        found.push(rows);
    }
    Ok(format!("corpus sums hold; fixtures give {found:?} rows"))
}

fn stability() -> Result<String, String> {
    let (cloud, y) = load_fixture("dataset1.csv");
    let claim = parse_claim("corr:X1:Y:+&corr:X2:Y:-").unwrap();
    let name = claim.name();
    let report = run_stability(&cloud, &y, FIXTURE_EPS, STABILITY_REPS, STABILITY_BASE_SEED, &[claim]).unwrap();
    let held = report.per_rep.iter().filter(|r| r.claims[&name]).count();
    let hist = ball_count_distribution(&report);
    let detail = format!("claim held {held}/{STABILITY_REPS}; ball counts {hist:?}");
    let (lo, hi) = STABILITY_SUPPORT;
    let in_support = hist.keys().all(|&b| (lo..=hi).contains(&b));
    if held == STABILITY_REPS && in_support {
        Ok(detail)
    } else if !in_support {
        Err(format!("{detail}; support leaves [{lo}, {hi}]"))
    } else {
        Err(detail)
    }
}

fn render_all(graph: &BallGraph, cover: &Cover, layout: &Layout, coloring: &str) -> (String, String, String) {
    let config = RenderConfig::new(coloring);
    (
        render_svg(graph, layout, &config).unwrap(),
        export_json(graph, cover, Some(layout)).unwrap(),
        export_dot(graph, &config).unwrap(),
    )
}

fn render_determinism(corpus: &[(PointCloud, f64)]) -> Result<String, String> {
    let pipeline = || {
        let (_, _, cover, graph) = fixture_graph();
        let layout = spring_layout(&graph, &LayoutConfig::default()).unwrap();
        render_all(&graph, &cover, &layout, "Y")
    };
    if pipeline() != pipeline() {
        return Err("fixture 1 renders differ between runs".into());
    }
    for (i, (cloud, eps)) in corpus.iter().take(ROUND_TRIP_GRAPHS).enumerate() {
        let cover = build_cover(cloud, &CoverConfig::sequential(*eps)).unwrap();
        let graph = build_graph(&cover, &random_coloring(cloud, i as u64)).unwrap();
        let layout = spring_layout(
            &graph,
            &LayoutConfig {
                seed: i as u64,
                ..Default::default()
            },
        )
        .unwrap();
        let text = export_json(&graph, &cover, Some(&layout)).unwrap();
        let doc = import_json(&text).map_err(|e| format!("graph {i}: {e}"))?;
        let want = GraphDocument {
            graph,
            cover,
            layout: Some(layout),
        };
        if doc != want {
            return Err(format!("graph {i}: round trip changed the document"));
        }
        let again = export_json(&doc.graph, &doc.cover, doc.layout.as_ref()).unwrap();
        if again != text {
            return Err(format!("graph {i}: re-export changed bytes"));
        }
    }
    Ok(format!(
        "SVG/JSON/DOT byte-identical; {ROUND_TRIP_GRAPHS} JSON round trips lossless"
    ))
}

fn strip_positions(json: &str) -> Value {
    let mut v: Value = serde_json::from_str(json).unwrap();
    for n in v["nodes"].as_array_mut().unwrap() {
        let o = n.as_object_mut().unwrap();
        o.remove("x");
        o.remove("y");
    }
    v
}

fn layout_invariance(corpus: &[(PointCloud, f64)]) -> Result<String, String> {
    let (_, _, cover, graph) = fixture_graph();
    let mut cases = vec![(graph, cover)];
    for (cloud, eps) in corpus.iter().take(20) {
        let cover = build_cover(cloud, &CoverConfig::sequential(*eps)).unwrap();
        cases.push((BallGraph::from_cover(&cover), cover));
    }
    let mut moved = 0;
    for (i, (graph, cover)) in cases.iter().enumerate() {
        for k in [None, Some(0.3)] {
            let cfg = |seed| LayoutConfig {
                k,
                seed,
                iterations: 50,
            };
            let a = spring_layout(graph, &cfg(1)).unwrap();
            let b = spring_layout(graph, &cfg(1)).unwrap();
            let bits = |l: &Layout| -> Vec<(usize, u64, u64)> {
                l.positions()
                    .iter()
                    .map(|(&id, &(x, y))| (id, x.to_bits(), y.to_bits()))
                    .collect()
            };
            if bits(&a) != bits(&b) {
                return Err(format!("case {i}: same seed, different coordinates"));
            }
            let c = spring_layout(graph, &cfg(2)).unwrap();
            let ids = |l: &Layout| l.positions().keys().copied().collect::<BTreeSet<_>>();
            if ids(&a) != ids(&c) {
                return Err(format!("case {i}: seeds placed different node sets"));
            }
            if graph.len() >= 3 && bits(&a) != bits(&c) {
                moved += 1;
            }
            let ja = strip_positions(&export_json(graph, cover, Some(&a)).unwrap());
            let jc = strip_positions(&export_json(graph, cover, Some(&c)).unwrap());
            if ja != jc {
                return Err(format!("case {i}: node or edge sets differ between seeds"));
            }
        }
    }
    Ok(format!(
        "{} graphs: same seed same bits, {moved} seed changes moved nodes, topology fixed",
        cases.len()
    ))
}

#[test]
fn acceptance() {
    let corpus = corpus();
    let mut report = Report::default();
    report.criterion("whole-sample summary statistics", secs(1), sample_summary);
    report.criterion("dataset 2 correlation", None, correlation);
    report.criterion("fixture ball counts and sizes", secs(1), fixture_covers);
    report.criterion("per-ball summary", None, per_ball_summary);
    report.criterion("fixture 1 topology", None, topology);
    report.criterion("filter mean-Y > 0", None, filter_positive);
    report.criterion("cover oracle suite", secs(30), || cover_suite(&corpus));
    report.criterion("edge oracle", None, || edge_suite(&corpus));
    report.criterion("points_and_balls row counts", None, || points_and_balls_rows(&corpus));
    report.criterion("stability harness", secs(30), stability);
    report.criterion("render determinism and JSON round trip", None, || {
        render_determinism(&corpus)
    });
    report.criterion("layout determinism and topology invariance", None, || {
        layout_invariance(&corpus)
    });
    report.finish();
}
