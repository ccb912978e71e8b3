//! The ball graph: one node per ball, one edge per pair of balls that share
//! at least one point. Node colorings are per-ball means of a variable.
//!
//! Graphs are values. Recoloring and filtering return new graphs, and ball
//! ids survive filtering unchanged.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::ingest::{ColoringVariable, PointCloud};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct BallNode {
    pub id: usize,
    pub landmark: usize,
    pub size: usize,
    pub colorings: BTreeMap<String, f64>,
}

/// Unordered pair `a < b` of intersecting balls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub intersection: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallGraph {
    nodes: Vec<BallNode>,
    edges: Vec<Edge>,
    eps: f64,
}

impl BallGraph {
    /// Uncolored graph of a cover.
    pub fn from_cover(cover: &Cover) -> Self {
        let nodes = cover
            .balls()
            .iter()
            .map(|b| BallNode {
                id: b.id,
                landmark: b.landmark,
                size: b.size(),
                colorings: BTreeMap::new(),
            })
            .collect();
        BallGraph {
            nodes,
            edges: intersection_edges(cover),
            eps: cover.eps(),
        }
    }

    /// Reassembles a graph, normalizing order. Fails on self-loops,
    /// duplicate edges, or edges that name a missing node.
    pub fn from_parts(mut nodes: Vec<BallNode>, mut edges: Vec<Edge>, eps: f64) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        if nodes.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidDocument("duplicate node id".into()));
        }
        for e in &mut edges {
            if e.a == e.b {
                return Err(Error::InvalidDocument(format!("self-edge on ball {}", e.a)));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
            for id in [e.a, e.b] {
                if nodes.binary_search_by_key(&id, |n| n.id).is_err() {
                    return Err(Error::InvalidDocument(format!("edge names unknown ball {id}")));
                }
            }
        }
        edges.sort();
        if edges.windows(2).any(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(Error::InvalidDocument("duplicate edge".into()));
        }
        Ok(BallGraph { nodes, edges, eps })
    }

    pub fn nodes(&self) -> &[BallNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> Option<&BallNode> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search_by_key(&(a, b), |e| (e.a, e.b)).is_ok()
    }

    /// Registered coloring names, sorted. Taken from the first node; every
    /// node carries the same set.
    pub fn coloring_names(&self) -> Vec<String> {
        self.nodes
            .first()
            .map(|n| n.colorings.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// `(ball id, value)` for a registered coloring.
    pub fn coloring(&self, name: &str) -> Result<Vec<(usize, f64)>> {
        self.nodes
            .iter()
            .map(|n| {
                n.colorings
                    .get(name)
                    .map(|v| (n.id, *v))
                    .ok_or_else(|| Error::UnknownColoring {
                        name: name.to_string(),
                        available: self.coloring_names(),
                    })
            })
            .collect()
    }

    /// Copy with every coloring except `keep` dropped.
    pub fn with_only_coloring(&self, keep: &str) -> Result<BallGraph> {
        self.coloring(keep)?;
        let mut g = self.clone();
        for n in &mut g.nodes {
            n.colorings.retain(|k, _| k == keep);
        }
        Ok(g)
    }
}

/// Edges with exact intersection counts, from each point's ball list.
fn intersection_edges(cover: &Cover) -> Vec<Edge> {
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for balls in cover.memberships() {
        for (i, &a) in balls.iter().enumerate() {
            for &b in &balls[i + 1..] {
                *counts.entry((a, b)).or_default() += 1;
            }
        }
    }
    let mut edges: Vec<Edge> = counts
        .into_iter()
        .map(|((a, b), intersection)| Edge { a, b, intersection })
        .collect();
    edges.sort();
    edges
}

/// Graph of `cover` colored by `coloring`.
pub fn build_graph(cover: &Cover, coloring: &ColoringVariable) -> Result<BallGraph> {
    add_coloring(&BallGraph::from_cover(cover), cover, coloring)
}

fn ball_means(graph: &BallGraph, cover: &Cover, variable: &ColoringVariable) -> Result<Vec<f64>> {
    variable.check_len(cover.n_points())?;
    graph
        .nodes
        .iter()
        .map(|n| {
            let ball = cover.ball(n.id).ok_or(Error::UnknownBall(n.id))?;
            let sum: f64 = ball.members.iter().map(|&p| variable.values[p]).sum();
            Ok(sum / ball.size() as f64)
        })
        .collect()
}

/// Registers the per-ball mean of `variable`. Fails if the name is taken.
pub fn add_coloring(graph: &BallGraph, cover: &Cover, variable: &ColoringVariable) -> Result<BallGraph> {
    if graph
        .nodes
        .first()
        .is_some_and(|n| n.colorings.contains_key(&variable.name))
    {
        return Err(Error::DuplicateColoring(variable.name.clone()));
    }
    set_coloring(graph, cover, variable)
}

/// Like [`add_coloring`] but overwrites an existing coloring of that name.
pub fn set_coloring(graph: &BallGraph, cover: &Cover, variable: &ColoringVariable) -> Result<BallGraph> {
    let means = ball_means(graph, cover, variable)?;
    let mut g = graph.clone();
    for (node, m) in g.nodes.iter_mut().zip(means) {
        node.colorings.insert(variable.name.clone(), m);
    }
    Ok(g)
}

/// Colors by one of the cloud's own axes, under the axis name.
pub fn color_by_variable(graph: &BallGraph, cover: &Cover, cloud: &PointCloud, column: &str) -> Result<BallGraph> {
    set_coloring(graph, cover, &cloud.column_variable(column)?)
}

/// Induced subgraph on the nodes that pass `keep`.
pub fn filter_by(graph: &BallGraph, keep: impl Fn(&BallNode) -> bool) -> BallGraph {
    let nodes: Vec<BallNode> = graph.nodes.iter().filter(|n| keep(n)).cloned().collect();
    let kept = |id: usize| nodes.binary_search_by_key(&id, |n| n.id).is_ok();
    let edges = graph.edges.iter().filter(|e| kept(e.a) && kept(e.b)).copied().collect();
    BallGraph {
        nodes,
        edges,
        eps: graph.eps,
    }
}

/// Predicate for [`filter_by`]: coloring `name` strictly above `threshold`.
/// Nodes without that coloring are dropped.
pub fn coloring_above(name: &str, threshold: f64) -> impl Fn(&BallNode) -> bool + '_ {
    move |n| n.colorings.get(name).is_some_and(|v| *v > threshold)
}

/// Predicate for [`filter_by`]: coloring `name` strictly below `threshold`.
pub fn coloring_below(name: &str, threshold: f64) -> impl Fn(&BallNode) -> bool + '_ {
    move |n| n.colorings.get(name).is_some_and(|v| *v < threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PointBall {
    pub point: usize,
    pub ball: usize,
}

/// One row per (point, ball) membership, sorted by ball then point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointsAndBalls {
    pub rows: Vec<PointBall>,
}

pub fn points_and_balls(cover: &Cover) -> PointsAndBalls {
    let rows = cover
        .balls()
        .iter()
        .flat_map(|b| b.members.iter().map(move |&p| PointBall { point: p, ball: b.id }))
        .collect();
    PointsAndBalls { rows }
}

impl PointsAndBalls {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Columns `point,ball`. `point` is the cloud's row id for that storage
    /// row, so tables from a reordered cloud still join on the source data.
    pub fn write_csv<W: Write>(&self, writer: W, cloud: &PointCloud) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        w.write_record(["point", "ball"]).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([cloud.index()[r.point].to_string(), r.ball.to_string()])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    /// Joins each membership row with the point's axis and variable values.
    pub fn merge(&self, cloud: &PointCloud, extra: &[ColoringVariable]) -> Result<MergedTable> {
        for v in extra {
            v.check_len(cloud.n())?;
        }
        let columns = cloud
            .columns()
            .iter()
            .cloned()
            .chain(extra.iter().map(|v| v.name.clone()))
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|r| MergedRow {
                point: cloud.index()[r.point],
                ball: r.ball,
                values: cloud
                    .row(r.point)
                    .iter()
                    .copied()
                    .chain(extra.iter().map(|v| v.values[r.point]))
                    .collect(),
            })
            .collect();
        Ok(MergedTable { columns, rows })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedRow {
    pub point: usize,
    pub ball: usize,
    pub values: Vec<f64>,
}

/// Membership rows joined with source values.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedTable {
    pub columns: Vec<String>,
    pub rows: Vec<MergedRow>,
}

impl MergedTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        let mut header = vec!["point".to_string(), "ball".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.point.to_string(), r.ball.to_string()];
            rec.extend(r.values.iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableStats {
    pub mean: f64,
    /// Sample standard deviation (divisor `n - 1`); 0 for a single member.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl VariableStats {
    fn of(values: &[f64]) -> Self {
        VariableStats {
            mean: stats::mean(values),
            sd: stats::std_dev(values, 1),
            min: stats::min(values),
            max: stats::max(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallSummaryRow {
    pub ball: usize,
    pub obs: usize,
    /// Aligned with [`BallSummary::variables`].
    pub stats: Vec<VariableStats>,
}

/// Mean, sd, min and max of each variable within each ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSummary {
    pub variables: Vec<String>,
    pub rows: Vec<BallSummaryRow>,
}

impl BallSummary {
    pub fn get(&self, ball: usize, variable: &str) -> Option<&VariableStats> {
        let j = self.variables.iter().position(|v| v == variable)?;
        self.rows.iter().find(|r| r.ball == ball).map(|r| &r.stats[j])
    }

    /// Columns `ball`, then `<var>_mean,<var>_sd,<var>_min,<var>_max` per
    /// variable, then `obs`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        let mut header = vec!["ball".to_string()];
        for v in &self.variables {
            for s in ["mean", "sd", "min", "max"] {
                header.push(format!("{v}_{s}"));
            }
        }
        header.push("obs".into());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.ball.to_string()];
            for s in &r.stats {
                rec.extend([s.mean, s.sd, s.min, s.max].iter().map(f64::to_string));
            }
            rec.push(r.obs.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))
    }
}

/// Per-ball statistics of every cloud axis followed by each extra variable.
pub fn ball_summary(cover: &Cover, cloud: &PointCloud, extra: &[ColoringVariable]) -> Result<BallSummary> {
    if cover.n_points() != cloud.n() {
        return Err(Error::LengthMismatch {
            what: "cover".into(),
            expected: cloud.n(),
            got: cover.n_points(),
        });
    }
    for v in extra {
        v.check_len(cloud.n())?;
    }
    let mut columns: Vec<(String, Vec<f64>)> = (0..cloud.k())
        .map(|j| (cloud.columns()[j].clone(), cloud.column(j)))
        .collect();
    columns.extend(extra.iter().map(|v| (v.name.clone(), v.values.clone())));

    let rows = cover
        .balls()
        .iter()
        .map(|b| {
            let stats = columns
                .iter()
                .map(|(_, col)| {
                    let vals: Vec<f64> = b.members.iter().map(|&p| col[p]).collect();
                    VariableStats::of(&vals)
                })
                .collect();
            BallSummaryRow {
                ball: b.id,
                obs: b.size(),
                stats,
            }
        })
        .collect();
    Ok(BallSummary {
        variables: columns.into_iter().map(|(n, _)| n).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{build_cover, CoverConfig};

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::new(xs.iter().map(|&x| vec![x]).collect(), vec!["x".into()]).unwrap()
    }

    fn var(name: &str, v: &[f64]) -> ColoringVariable {
        ColoringVariable::new(name, v.to_vec()).unwrap()
    }

    #[test]
    fn shared_point_makes_one_edge() {
        let c = line(&[0.0, 0.8, 1.6]);
        let cover = build_cover(&c, &CoverConfig::sequential(1.0)).unwrap();
        assert_eq!(cover.len(), 2);
        let g = build_graph(&cover, &var("y", &[0.0, 1.0, 2.0])).unwrap();
        assert_eq!(
            g.edges(),
            &[Edge {
                a: 0,
                b: 1,
                intersection: 1
            }]
        );
        assert!(g.has_edge(1, 0));
    }

    #[test]
    fn separated_clusters_have_no_edges() {
        let c = line(&[0.0, 0.1, 0.2, 5.0, 5.1]);
        let cover = build_cover(&c, &CoverConfig::sequential(0.5)).unwrap();
        let g = BallGraph::from_cover(&cover);
        assert_eq!(g.len(), 2);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn coloring_means() {
        let c = line(&[0.0, 0.5, 10.0]);
        let cover = build_cover(&c, &CoverConfig::sequential(1.0)).unwrap();
        let g = build_graph(&cover, &var("y", &[1.0, 3.0, 7.0])).unwrap();
        assert_eq!(g.node(0).unwrap().colorings["y"], 2.0);
        assert_eq!(g.node(1).unwrap().colorings["y"], 7.0);

        let g2 = add_coloring(&g, &cover, &var("c", &[4.0, 4.0, 4.0])).unwrap();
        assert!(g2.nodes().iter().all(|n| n.colorings["c"] == 4.0));
        assert_eq!(g2.node(0).unwrap().colorings["y"], 2.0);
    }

    #[test]
    fn coloring_errors() {
        let c = line(&[0.0, 0.5]);
        let cover = build_cover(&c, &CoverConfig::sequential(1.0)).unwrap();
        let g = build_graph(&cover, &var("y", &[1.0, 3.0])).unwrap();
        assert!(matches!(
            add_coloring(&g, &cover, &var("y", &[0.0, 0.0])),
            Err(Error::DuplicateColoring(_))
        ));
        assert!(set_coloring(&g, &cover, &var("y", &[0.0, 0.0])).is_ok());
        assert!(matches!(
            add_coloring(&g, &cover, &var("z", &[0.0])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            build_graph(&cover, &var("z", &[0.0, 1.0, 2.0])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            color_by_variable(&g, &cover, &c, "nope"),
            Err(Error::MissingColumn(_))
        ));
        assert!(matches!(g.coloring("nope"), Err(Error::UnknownColoring { .. })));
    }

    #[test]
    fn registry_keeps_both_colorings() {
        let c = line(&[0.0, 0.5, 3.0]);
        let cover = build_cover(&c, &CoverConfig::sequential(1.0)).unwrap();
        let g = BallGraph::from_cover(&cover);
        let g = color_by_variable(&g, &cover, &c, "x").unwrap();
        let g = add_coloring(&g, &cover, &var("Y", &[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(g.coloring_names(), vec!["Y".to_string(), "x".to_string()]);
        assert_eq!(g.coloring("x").unwrap(), vec![(0, 0.25), (1, 3.0)]);
    }

    #[test]
    fn filtering_keeps_ids() {
        let c = line(&[0.0, 0.9, 1.8, 2.7]);
        let cover = build_cover(&c, &CoverConfig::sequential(1.0)).unwrap();
        let g = build_graph(&cover, &var("y", &[-1.0, 1.0, 2.0, 3.0])).unwrap();
        assert_eq!(filter_by(&g, |_| true), g);
        let none = filter_by(&g, |_| false);
        assert!(none.is_empty() && none.edges().is_empty());
        let pos = filter_by(&g, coloring_above("y", 0.0));
        assert!(pos.nodes().iter().all(|n| n.colorings["y"] > 0.0));
        assert!(pos.nodes().iter().all(|n| g.node(n.id).is_some()));
    }

    #[test]
    fn disjoint_cover_points_and_balls() {
        let c = line(&[0.0, 5.0, 10.0]);
        let cover = build_cover(&c, &CoverConfig::sequential(1.0)).unwrap();
        let pab = points_and_balls(&cover);
        assert_eq!(pab.len(), 3);
        let mut buf = Vec::new();
        pab.write_csv(&mut buf, &c).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "point,ball\n0,0\n1,1\n2,2\n");
    }

    #[test]
    fn single_member_summary() {
        let c = line(&[0.0, 5.0]);
        let cover = build_cover(&c, &CoverConfig::sequential(1.0)).unwrap();
        let s = ball_summary(&cover, &c, &[]).unwrap();
        let st = s.get(1, "x").unwrap();
        assert_eq!((st.mean, st.sd, st.min, st.max), (5.0, 0.0, 5.0, 5.0));
        assert_eq!(s.rows[1].obs, 1);
    }

    #[test]
    fn merge_joins_values() {
        let c = line(&[0.0, 0.5, 3.0]);
        let cover = build_cover(&c, &CoverConfig::sequential(1.0)).unwrap();
        let m = points_and_balls(&cover)
            .merge(&c, &[var("y", &[7.0, 8.0, 9.0])])
            .unwrap();
        assert_eq!(m.columns, vec!["x", "y"]);
        assert_eq!(m.rows.len(), 3);
        assert_eq!(
            m.rows[1],
            MergedRow {
                point: 1,
                ball: 0,
                values: vec![0.5, 8.0]
            }
        );
    }

    #[test]
    fn from_parts_validates() {
        let node = |id| BallNode {
            id,
            landmark: id,
            size: 1,
            colorings: BTreeMap::new(),
        };
        assert!(BallGraph::from_parts(
            vec![node(0)],
            vec![Edge {
                a: 0,
                b: 0,
                intersection: 1
            }],
            1.0
        )
        .is_err());
        assert!(BallGraph::from_parts(
            vec![node(0)],
            vec![Edge {
                a: 0,
                b: 3,
                intersection: 1
            }],
            1.0
        )
        .is_err());
        let g = BallGraph::from_parts(
            vec![node(1), node(0)],
            vec![Edge {
                a: 1,
                b: 0,
                intersection: 2,
            }],
            1.0,
        )
        .unwrap();
        assert_eq!(g.nodes()[0].id, 0);
        assert_eq!(
            g.edges()[0],
            Edge {
                a: 0,
                b: 1,
                intersection: 2
            }
        );
    }
}
