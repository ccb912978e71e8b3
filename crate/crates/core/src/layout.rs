//! Seeded Fruchterman-Reingold placement of a [`BallGraph`].
//!
//! Positions start uniform in the unit square, every pair of nodes repels
//! with force `k^2 / d`, every edge attracts with `d^2 / k`, and each step is
//! capped by a temperature that falls linearly to zero. The result is
//! centered and scaled so the largest coordinate magnitude is 1.
//!
//! Only the topology is read: node ids, their order, and the edge list.
//! Colorings and sizes never move a node.

use std::collections::BTreeMap;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::BallGraph;
use crate::rng;

const INITIAL_TEMPERATURE: f64 = 0.1;
const MIN_DISTANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutConfig {
    /// Optimal edge length. `None` means `1 / sqrt(node count)`.
    pub k: Option<f64>,
    pub seed: u64,
    pub iterations: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            k: None,
            seed: 0,
            iterations: 50,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.k {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "spring constant k must be positive, got {k}"
                )));
            }
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn spring_constant(&self, nodes: usize) -> f64 {
        self.k.unwrap_or_else(|| 1.0 / (nodes.max(1) as f64).sqrt())
    }
}

/// Ball id to position in `[-1, 1]^2`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layout {
    positions: BTreeMap<usize, (f64, f64)>,
}

impl Layout {
    pub fn from_positions(positions: BTreeMap<usize, (f64, f64)>) -> Self {
        Layout { positions }
    }

    pub fn get(&self, id: usize) -> Option<(f64, f64)> {
        self.positions.get(&id).copied()
    }

    pub fn positions(&self) -> &BTreeMap<usize, (f64, f64)> {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

pub fn spring_layout(graph: &BallGraph, config: &LayoutConfig) -> Result<Layout> {
    config.validate()?;
    let ids: Vec<usize> = graph.nodes().iter().map(|n| n.id).collect();
    let n = ids.len();
    match n {
        0 => return Err(Error::EmptyGraph),
        // A lone node sits at the origin; two nodes span the horizontal
        // diameter, lower id on the left.
        1 => return Ok(Layout::from_positions(BTreeMap::from([(ids[0], (0.0, 0.0))]))),
        2 => {
            return Ok(Layout::from_positions(BTreeMap::from([
                (ids[0], (-1.0, 0.0)),
                (ids[1], (1.0, 0.0)),
            ])))
        }
        _ => {}
    }

    let slot: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let edges: Vec<(usize, usize)> = graph.edges().iter().map(|e| (slot[&e.a], slot[&e.b])).collect();

    let mut rng = rng::seeded(config.seed);
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();

    let k = config.spring_constant(n);
    let k2 = k * k;
    let mut temperature = INITIAL_TEMPERATURE;
    let cooling = INITIAL_TEMPERATURE / (config.iterations as f64 + 1.0);
    let mut disp = vec![[0.0f64; 2]; n];

    for _ in 0..config.iterations {
        disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);
        for i in 0..n {
            for j in i + 1..n {
                let dx = pos[i][0] - pos[j][0];
                let dy = pos[i][1] - pos[j][1];
                let d = dx.hypot(dy).max(MIN_DISTANCE);
                let f = k2 / (d * d);
                disp[i][0] += dx * f;
                disp[i][1] += dy * f;
                disp[j][0] -= dx * f;
                disp[j][1] -= dy * f;
            }
        }
        for &(a, b) in &edges {
            let dx = pos[a][0] - pos[b][0];
            let dy = pos[a][1] - pos[b][1];
            let d = dx.hypot(dy).max(MIN_DISTANCE);
            // unit vector times d^2 / k
            let f = d / k;
            disp[a][0] -= dx * f;
            disp[a][1] -= dy * f;
            disp[b][0] += dx * f;
            disp[b][1] += dy * f;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                let step = len.min(temperature) / len;
                p[0] += d[0] * step;
                p[1] += d[1] * step;
            }
        }
        temperature -= cooling;
    }

    rescale(&mut pos);
    Ok(Layout::from_positions(
        ids.into_iter().zip(pos.into_iter().map(|p| (p[0], p[1]))).collect(),
    ))
}

/// Centers on the mean and divides by the largest absolute coordinate.
fn rescale(pos: &mut [[f64; 2]]) {
    let n = pos.len() as f64;
    let cx = pos.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pos.iter().map(|p| p[1]).sum::<f64>() / n;
    let mut lim = 0.0f64;
    for p in pos.iter_mut() {
        p[0] -= cx;
        p[1] -= cy;
        lim = lim.max(p[0].abs()).max(p[1].abs());
    }
    if lim > 0.0 {
        for p in pos.iter_mut() {
            p[0] /= lim;
            p[1] /= lim;
        }
    }
}

/// Mean squared deviation of edge lengths from `k`; 0 for an edgeless graph.
pub fn layout_stress(graph: &BallGraph, layout: &Layout, k: f64) -> Result<f64> {
    if graph.edges().is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for e in graph.edges() {
        let a = layout.get(e.a).ok_or(Error::MissingPosition(e.a))?;
        let b = layout.get(e.b).ok_or(Error::MissingPosition(e.b))?;
        let len = (a.0 - b.0).hypot(a.1 - b.1);
        total += (len - k) * (len - k);
    }
    Ok(total / graph.edges().len() as f64)
}
