//! Shared plumbing for the acceptance suite in `tests/acceptance.rs`: a
//! report that prints one PASS/FAIL line per criterion, fixture loading, and
//! brute-force oracles written against the definitions rather than against
//! the engine's own helpers.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use tdabm::ingest::{load_csv, ColoringVariable, PointCloud};
use tdabm::Cover;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")).join(name)
}

/// A fixture as exported: axes `X1, X2` (already standardized) and
/// outcome `Y`.
pub fn load_fixture(name: &str) -> (PointCloud, ColoringVariable) {
    let (cloud, y) = load_csv(fixture_path(name), &["X1", "X2"], Some("Y")).expect("fixture loads");
    (cloud, y.expect("Y column"))
}

/// Straight to the stderr handle: the test harness only captures the print
/// macros, so these lines show up in a plain `cargo test` run.
fn emit(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Default)]
pub struct Report {
    outcomes: Vec<Outcome>,
}

impl Report {
    /// Runs one criterion. `check` returns a detail line on success and the
    /// reason on failure; `limit` is the runtime bound, if any.
    pub fn criterion(&mut self, name: &str, limit: Option<Duration>, check: impl FnOnce() -> Result<String, String>) {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        if let Some(limit) = limit {
            if elapsed > limit {
                passed = false;
                detail = format!("{detail}; took {elapsed:.2?}, limit {limit:.0?}");
            }
        }
        emit(&format!(
            "{} {name} [{elapsed:.2?}]: {detail}",
            if passed { "PASS" } else { "FAIL" }
        ));
        self.outcomes.push(Outcome {
            name: name.to_string(),
            passed,
            detail,
            elapsed,
        });
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// Prints the tally and panics if anything failed.
    pub fn finish(self) {
        let failed: Vec<&str> = self
            .outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.name.as_str())
            .collect();
        emit(&format!(
            "acceptance: {} passed, {} failed",
            self.outcomes.len() - failed.len(),
            failed.len()
        ));
        assert!(failed.is_empty(), "failed criteria: {failed:?}");
    }
}

/// `|a - b| <= tol`, with a message naming the cell otherwise.
pub fn close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got:.6}, expected {want} (tolerance {tol})"))
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Checks a cover against the definition: ids `0..m`, every point covered,
/// each ball exactly the closed ε-ball of its landmark, landmarks pairwise
/// farther apart than ε, and each landmark uncovered when it was chosen.
/// With `sequential`, also that each landmark is the lowest such row.
pub fn cover_oracle(cloud: &PointCloud, cover: &Cover, sequential: bool) -> Result<(), String> {
    let eps = cover.eps();
    let n = cloud.n();
    if cover.n_points() != n {
        return Err(format!("cover has {} points, cloud {n}", cover.n_points()));
    }
    let mut covered = vec![false; n];
    for (i, ball) in cover.balls().iter().enumerate() {
        if ball.id != i {
            return Err(format!("ball {i} has id {}", ball.id));
        }
        if covered[ball.landmark] {
            return Err(format!("ball {i}: landmark {} was already covered", ball.landmark));
        }
        if sequential {
            let first = covered.iter().position(|c| !c).expect("a landmark was chosen");
            if first != ball.landmark {
                return Err(format!(
                    "ball {i}: landmark {} but lowest uncovered is {first}",
                    ball.landmark
                ));
            }
        }
        let centre = cloud.row(ball.landmark);
        let want: Vec<usize> = (0..n).filter(|&p| dist(cloud.row(p), centre) <= eps).collect();
        if ball.members != want {
            return Err(format!(
                "ball {i}: {} members, brute force finds {}",
                ball.members.len(),
                want.len()
            ));
        }
        for &p in &want {
            covered[p] = true;
        }
    }
    if let Some(p) = covered.iter().position(|c| !c) {
        return Err(format!("point {p} is uncovered"));
    }
    let balls = cover.balls();
    for (i, a) in balls.iter().enumerate() {
        for b in &balls[i + 1..] {
            let d = dist(cloud.row(a.landmark), cloud.row(b.landmark));
            if d <= eps {
                return Err(format!("landmarks of balls {} and {} are {d} apart", a.id, b.id));
            }
        }
    }
    Ok(())
}

/// Every pair of balls sharing at least one point, with the shared count.
pub fn brute_force_edges(cover: &Cover) -> BTreeMap<(usize, usize), usize> {
    let balls = cover.balls();
    let mut edges = BTreeMap::new();
    for (i, a) in balls.iter().enumerate() {
        for b in &balls[i + 1..] {
            let shared = a.members.iter().filter(|p| b.members.contains(p)).count();
            if shared > 0 {
                edges.insert((a.id, b.id), shared);
            }
        }
    }
    edges
}
