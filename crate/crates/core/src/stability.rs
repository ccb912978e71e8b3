//! Reordering experiments. The sequential cover depends on row order, so
//! rebuilding it under many seeded row permutations shows which conclusions
//! about the graph hold regardless of where the landmarks happened to fall.
//!
//! A conclusion is a named [`Claim`]. Built-ins can be parsed from short
//! strings (see [`parse_claim`]); anything else can be a closure via
//! [`FnClaim`].

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{build_cover, Cover, CoverConfig};
use crate::error::{Error, Result};
use crate::graph::{build_graph, color_by_variable, BallGraph};
use crate::ingest::{ColoringVariable, Permutation, PointCloud};
use crate::stats::pearson;

/// What a claim gets to look at in one repetition. `cloud` and `cover` are
/// in permuted row order; `permutation` maps a position back to the
/// original row.
pub struct RepContext<'a> {
    pub cloud: &'a PointCloud,
    pub cover: &'a Cover,
    pub graph: &'a BallGraph,
    pub permutation: &'a Permutation,
}

impl RepContext<'_> {
    /// Position of original row `row` in this repetition.
    pub fn position_of(&self, row: usize) -> Option<usize> {
        self.cloud.index().iter().position(|&i| i == row)
    }
}

pub trait Claim: Send + Sync {
    fn name(&self) -> String;
    fn holds(&self, ctx: &RepContext<'_>) -> bool;
}

/// Sign of the Pearson correlation, taken across balls, between the mean
/// colorings `a` and `b`. Undefined correlations (fewer than two balls or a
/// constant coloring) do not hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationSign {
    pub a: String,
    pub b: String,
    pub positive: bool,
}

impl Claim for CorrelationSign {
    fn name(&self) -> String {
        format!("corr:{}:{}:{}", self.a, self.b, if self.positive { '+' } else { '-' })
    }

    fn holds(&self, ctx: &RepContext<'_>) -> bool {
        let (Ok(a), Ok(b)) = (ctx.graph.coloring(&self.a), ctx.graph.coloring(&self.b)) else {
            return false;
        };
        let a: Vec<f64> = a.into_iter().map(|(_, v)| v).collect();
        let b: Vec<f64> = b.into_iter().map(|(_, v)| v).collect();
        let r = pearson(&a, &b);
        if self.positive {
            r > 0.0
        } else {
            r < 0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinBalls(pub usize);

impl Claim for MinBalls {
    fn name(&self) -> String {
        format!("balls>=:{}", self.0)
    }

    fn holds(&self, ctx: &RepContext<'_>) -> bool {
        ctx.cover.len() >= self.0
    }
}

/// Original rows `i` and `j` fall in a common ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharedBall(pub usize, pub usize);

impl Claim for SharedBall {
    fn name(&self) -> String {
        format!("share:{}:{}", self.0, self.1)
    }

    fn holds(&self, ctx: &RepContext<'_>) -> bool {
        let (Some(i), Some(j)) = (ctx.position_of(self.0), ctx.position_of(self.1)) else {
            return false;
        };
        ctx.cover.balls().iter().any(|b| b.contains(i) && b.contains(j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EveryBallNonEmpty;

impl Claim for EveryBallNonEmpty {
    fn name(&self) -> String {
        "nonempty".into()
    }

    fn holds(&self, ctx: &RepContext<'_>) -> bool {
        ctx.cover.balls().iter().all(|b| b.size() >= 1)
    }
}

/// Conjunction; its name joins the parts with `&`.
pub struct All(pub Vec<Box<dyn Claim>>);

impl Claim for All {
    fn name(&self) -> String {
        self.0.iter().map(|c| c.name()).collect::<Vec<_>>().join("&")
    }

    fn holds(&self, ctx: &RepContext<'_>) -> bool {
        self.0.iter().all(|c| c.holds(ctx))
    }
}

pub struct FnClaim<F> {
    name: String,
    f: F,
}

impl<F> FnClaim<F>
where
    F: Fn(&RepContext<'_>) -> bool + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnClaim { name: name.into(), f }
    }
}

impl<F> Claim for FnClaim<F>
where
    F: Fn(&RepContext<'_>) -> bool + Send + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }

    fn holds(&self, ctx: &RepContext<'_>) -> bool {
        (self.f)(ctx)
    }
}

/// Parses a built-in claim:
///
/// | text            | claim                                     |
/// |-----------------|-------------------------------------------|
/// | `corr:A:B:+`    | mean-A and mean-B correlate positively     |
/// | `corr:A:B:-`    | ... negatively                            |
/// | `balls>=:N`     | at least N balls                          |
/// | `share:I:J`     | original rows I and J share a ball        |
/// | `nonempty`      | every ball has a member                   |
///
/// Parts joined by `&` form a conjunction.
pub fn parse_claim(text: &str) -> Result<Box<dyn Claim>> {
    let text = text.trim();
    if text.contains('&') {
        let parts = text.split('&').map(parse_claim).collect::<Result<Vec<_>>>()?;
        return Ok(Box::new(All(parts)));
    }
    let bad = || Error::InvalidConfig(format!("cannot parse claim `{text}`"));
    let fields: Vec<&str> = text.split(':').collect();
    let int = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let claim: Box<dyn Claim> = match fields.as_slice() {
        ["corr", a, b, sign] if !a.is_empty() && !b.is_empty() => {
            let positive = match *sign {
                "+" => true,
                "-" => false,
                _ => return Err(bad()),
            };
            Box::new(CorrelationSign {
                a: a.to_string(),
                b: b.to_string(),
                positive,
            })
        }
        ["balls>=", n] => Box::new(MinBalls(int(n)?)),
        ["share", i, j] => Box::new(SharedBall(int(i)?, int(j)?)),
        ["nonempty"] => Box::new(EveryBallNonEmpty),
        _ => return Err(bad()),
    };
    Ok(claim)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub rep: usize,
    pub seed: u64,
    pub ball_count: usize,
    pub claims: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub reps: usize,
    pub eps: f64,
    pub base_seed: u64,
    /// Claim names in the order they were given.
    pub claims: Vec<String>,
    pub per_rep: Vec<RepResult>,
    /// Fraction of repetitions in which each claim held.
    pub aggregate: BTreeMap<String, f64>,
}

impl StabilityReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::InvalidDocument(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// One row per repetition: `rep,seed,ball_count,<claim>...`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        let mut header = vec!["rep".to_string(), "seed".into(), "ball_count".into()];
        header.extend(self.claims.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.per_rep {
            let mut row = vec![r.rep.to_string(), r.seed.to_string(), r.ball_count.to_string()];
            row.extend(self.claims.iter().map(|c| r.claims[c].to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))
    }
}

/// Everything one repetition produced.
pub struct RepOutcome {
    pub cloud: PointCloud,
    pub cover: Cover,
    pub graph: BallGraph,
    pub claims: BTreeMap<String, bool>,
}

/// Reorders by `permutation`, builds the sequential cover and a graph
/// colored by `coloring` and by every axis, and evaluates the claims.
pub fn run_repetition(
    cloud: &PointCloud,
    coloring: &ColoringVariable,
    eps: f64,
    permutation: &Permutation,
    claims: &[Box<dyn Claim>],
) -> Result<RepOutcome> {
    coloring.check_len(cloud.n())?;
    if permutation.len() != cloud.n() {
        return Err(Error::LengthMismatch {
            what: "permutation".into(),
            expected: cloud.n(),
            got: permutation.len(),
        });
    }
    let cloud = cloud.reorder(permutation);
    let coloring = coloring.reorder(permutation);
    let cover = build_cover(&cloud, &CoverConfig::sequential(eps))?;
    let mut graph = build_graph(&cover, &coloring)?;
    for axis in cloud.columns() {
        if *axis != coloring.name {
            graph = color_by_variable(&graph, &cover, &cloud, axis)?;
        }
    }
    let ctx = RepContext {
        cloud: &cloud,
        cover: &cover,
        graph: &graph,
        permutation,
    };
    let claims = claims.iter().map(|c| (c.name(), c.holds(&ctx))).collect();
    Ok(RepOutcome {
        cloud,
        cover,
        graph,
        claims,
    })
}

fn claim_names(claims: &[Box<dyn Claim>]) -> Result<Vec<String>> {
    let names: Vec<String> = claims.iter().map(|c| c.name()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig(format!("claim `{}` given twice", w[0])));
    }
    Ok(names)
}

/// Repetition `r` shuffles rows with seed `base_seed + r` (wrapping).
/// Repetitions run on the current rayon pool; results are in rep order.
pub fn run_stability(
    cloud: &PointCloud,
    coloring: &ColoringVariable,
    eps: f64,
    reps: usize,
    base_seed: u64,
    claims: &[Box<dyn Claim>],
) -> Result<StabilityReport> {
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    CoverConfig::sequential(eps).validate()?;
    coloring.check_len(cloud.n())?;
    let names = claim_names(claims)?;

    let per_rep = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let seed = base_seed.wrapping_add(rep as u64);
            let perm = Permutation::random(cloud.n(), seed);
            let out = run_repetition(cloud, coloring, eps, &perm, claims)?;
            Ok(RepResult {
                rep,
                seed,
                ball_count: out.cover.len(),
                claims: out.claims,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let aggregate = names
        .iter()
        .map(|name| {
            let held = per_rep.iter().filter(|r| r.claims[name]).count();
            (name.clone(), held as f64 / reps as f64)
        })
        .collect();
    Ok(StabilityReport {
        reps,
        eps,
        base_seed,
        claims: names,
        per_rep,
        aggregate,
    })
}

/// [`run_stability`] on a dedicated pool of `jobs` threads.
pub fn run_stability_jobs(
    cloud: &PointCloud,
    coloring: &ColoringVariable,
    eps: f64,
    reps: usize,
    base_seed: u64,
    claims: &[Box<dyn Claim>],
    jobs: usize,
) -> Result<StabilityReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_stability(cloud, coloring, eps, reps, base_seed, claims))
}

/// Number of repetitions that produced each ball count.
pub fn ball_count_distribution(report: &StabilityReport) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for r in &report.per_rep {
        *hist.entry(r.ball_count).or_insert(0) += 1;
    }
    hist
}
