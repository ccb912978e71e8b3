use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")).join(name)
}

fn tdabm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdabm"))
        .args(args)
        .env_remove("TDABM_LOG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = tdabm(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build_fixture(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("g1.json");
    let data = fixture("dataset1.csv");
    let mut args = vec![
        "build",
        "--input",
        s(&data),
        "--axes",
        "X1,X2",
        "--color",
        "Y",
        "--eps",
        "1.5",
    ];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", s(&out)]);
    ok(&args);
    out
}

#[test]
fn build_writes_graph_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = build_fixture(dir.path(), &[]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let sizes: Vec<u64> = doc["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| n["size"].as_u64().unwrap())
        .collect();
    assert_eq!(sizes, [485, 307, 225, 380, 209, 176, 306]);
    assert!(doc["nodes"][0]["x"].is_number());

    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g1.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "build");
    assert_eq!(manifest["args"]["eps"], 1.5);
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn exit_codes_separate_validation_from_io() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let data = fixture("dataset1.csv");
    let bad_eps = tdabm(&[
        "build",
        "--input",
        s(&data),
        "--axes",
        "X1,X2",
        "--eps",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(bad_eps.status.code(), Some(1));
    assert!(!out.exists());

    let missing = dir.path().join("nope.csv");
    let no_file = tdabm(&[
        "build",
        "--input",
        s(&missing),
        "--axes",
        "X1,X2",
        "--eps",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(no_file.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&no_file.stderr).contains("nope.csv"));

    let bad_column = tdabm(&[
        "build",
        "--input",
        s(&data),
        "--axes",
        "X1,Q",
        "--eps",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(bad_column.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_column.stderr).contains('Q'));

    assert_eq!(tdabm(&["build", "--bogus"]).status.code(), Some(1));
    assert_eq!(tdabm(&["--help"]).status.code(), Some(0));
}

#[test]
fn random_policy_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--policy", "random", "--seed", "42"];
    let ga = std::fs::read(build_fixture(a.path(), &args)).unwrap();
    let gb = std::fs::read(build_fixture(b.path(), &args)).unwrap();
    assert_eq!(ga, gb);
    let seq = std::fs::read(build_fixture(b.path(), &[])).unwrap();
    assert_ne!(ga, seq);
}

#[test]
fn plot_options() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build_fixture(dir.path(), &[]);
    let svg = dir.path().join("p.svg");
    let stdout = ok(&["plot", "--graph", s(&graph), "--cmap", "rainbow", "--out", s(&svg)]);
    assert!(stdout.contains("colored by Y"), "{stdout}");
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 7);
    assert_eq!(text.matches("<line").count(), 12);
    assert!(text.contains("id=\"colorbar\""));

    let bare = dir.path().join("bare.svg");
    ok(&[
        "plot",
        "--graph",
        s(&graph),
        "--no-colorbar",
        "--coloring",
        "X1",
        "--out",
        s(&bare),
    ]);
    assert!(!std::fs::read_to_string(&bare).unwrap().contains("id=\"colorbar\""));

    let unknown = tdabm(&["plot", "--graph", s(&graph), "--coloring", "Z", "--out", s(&bare)]);
    assert_eq!(unknown.status.code(), Some(1));
    let err = String::from_utf8_lossy(&unknown.stderr);
    assert!(err.contains("X1") && err.contains("X2") && err.contains('Y'), "{err}");

    let kept = dir.path().join("kept.svg");
    let stdout = ok(&["plot", "--graph", s(&graph), "--above", "0", "--out", s(&kept)]);
    assert!(stdout.starts_with("3 balls"), "{stdout}");
}

#[test]
fn fixed_scale_keeps_fills_when_filtering() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build_fixture(dir.path(), &[]);
    let fills = |extra: &[&str], out: &Path| -> Vec<String> {
        let mut args = vec!["plot", "--graph", s(&graph), "--out", s(out)];
        args.extend_from_slice(extra);
        ok(&args);
        std::fs::read_to_string(out)
            .unwrap()
            .lines()
            .filter(|l| l.starts_with("<circle"))
            .map(|l| l.split("fill=\"").nth(1).unwrap()[..7].to_string())
            .collect()
    };
    let scale = ["--vmin", "-3", "--vmax", "3"];
    let all = fills(&scale, &dir.path().join("all.svg"));
    let kept = fills(&[&scale[..], &["--above", "0"]].concat(), &dir.path().join("kept.svg"));
    assert_eq!(all.len(), 7);
    assert_eq!(kept, [all[2].clone(), all[3].clone(), all[6].clone()]);

    // Without a fixed scale the filtered plot rescales to its own range.
    let auto = fills(&["--above", "0"], &dir.path().join("auto.svg"));
    assert_ne!(auto, kept);
}

#[test]
fn dot_export() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build_fixture(dir.path(), &[]);
    let dot = dir.path().join("g.dot");
    ok(&["plot", "--graph", s(&graph), "--out", s(&dot)]);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("graph"));
    assert_eq!(text.matches(" -- ").count(), 12);
}

#[test]
fn summary_uses_the_build_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let graph = build_fixture(dir.path(), &[]);
    let table = dir.path().join("s.csv");
    let points = dir.path().join("pb.csv");
    let data = fixture("dataset1.csv");
    ok(&[
        "summary",
        "--graph",
        s(&graph),
        "--input",
        s(&data),
        "--out",
        s(&table),
        "--points",
        s(&points),
    ]);
    let text = std::fs::read_to_string(&table).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let cell = |name: &str| -> f64 {
        let i = header
            .iter()
            .position(|h| *h == name)
            .unwrap_or_else(|| panic!("{name} in {header:?}"));
        row[i].parse().unwrap()
    };
    assert_eq!(cell("obs"), 485.0);
    assert!((cell("Y_mean") - -0.587).abs() < 1e-3, "{}", cell("Y_mean"));
    assert_eq!(std::fs::read_to_string(&points).unwrap().lines().count(), 2089);

    let orphan = dir.path().join("orphan.json");
    std::fs::copy(&graph, &orphan).unwrap();
    let no_axes = tdabm(&[
        "summary",
        "--graph",
        s(&orphan),
        "--input",
        s(&data),
        "--out",
        s(&table),
    ]);
    assert_eq!(no_axes.status.code(), Some(1));
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        ok(&["synth", "--n", "500", "--rho", "0.5", "--seed", "3", "--out", s(out)]);
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next().unwrap(), "X1,X2,Y");
    assert_eq!(text.lines().count(), 501);
}

#[test]
fn stability_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("st.csv");
    let data = fixture("dataset1.csv");
    let stdout = ok(&[
        "stability",
        "--input",
        s(&data),
        "--axes",
        "X1,X2",
        "--color",
        "Y",
        "--eps",
        "1.5",
        "--reps",
        "20",
        "--claim",
        "balls>=:3",
        "--claim",
        "corr:X1:Y:+",
        "--out",
        s(&out),
    ]);
    assert!(stdout.contains("balls>=:3: held in 100.0%"), "{stdout}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert_eq!(
        text.lines().next().unwrap(),
        "rep,seed,ball_count,balls>=:3,corr:X1:Y:+"
    );

    let json = dir.path().join("st.json");
    ok(&[
        "stability",
        "--input",
        s(&data),
        "--axes",
        "X1,X2",
        "--color",
        "Y",
        "--eps",
        "1.5",
        "--reps",
        "20",
        "--claim",
        "balls>=:3",
        "--claim",
        "corr:X1:Y:+",
        "--jobs",
        "2",
        "--out",
        s(&json),
    ]);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let counts: Vec<String> = report["per_rep"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["ball_count"].to_string())
        .collect();
    let csv_counts: Vec<String> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .collect();
    assert_eq!(counts, csv_counts);

    let bad = tdabm(&[
        "stability",
        "--input",
        s(&data),
        "--axes",
        "X1,X2",
        "--color",
        "Y",
        "--eps",
        "1.5",
        "--claim",
        "what",
        "--out",
        s(&out),
    ]);
    assert_eq!(bad.status.code(), Some(1));
}
