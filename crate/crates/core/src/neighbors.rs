//! Fixed-radius neighbor queries over a [`PointCloud`].
//!
//! The only query the cover needs is "all rows within `eps` of row `q`,
//! boundary included". [`BruteForce`] is the reference; [`UniformGrid`] buckets
//! rows into cells slightly wider than `eps` and scans the 3^K block around
//! the query cell. Both decide membership with the same
//! [`euclidean`](crate::ingest::euclidean) call, so they agree exactly.

use std::collections::HashMap;

use crate::ingest::{euclidean, PointCloud};

pub trait RadiusSearch {
    /// Sorted rows `i` with `d(x_i, x_query) <= eps`.
    fn within(&self, cloud: &PointCloud, query: usize, eps: f64) -> Vec<usize>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForce;

impl RadiusSearch for BruteForce {
    fn within(&self, cloud: &PointCloud, query: usize, eps: f64) -> Vec<usize> {
        let q = cloud.row(query);
        cloud
            .rows()
            .enumerate()
            .filter(|(_, r)| euclidean(r, q) <= eps)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Largest K for which the grid is used by [`build_index`].
pub const MAX_GRID_DIM: usize = 6;

// Cells are widened by this relative margin so rounding in the cell
// coordinate can never push a true neighbor two cells away.
const CELL_SLACK: f64 = 1e-9;
// Cell coordinates beyond this lose integer precision in f64.
const MAX_CELL_COORD: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct UniformGrid {
    origin: Vec<f64>,
    width: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    keys: Vec<Vec<i64>>,
    offsets: Vec<Vec<i64>>,
}

impl UniformGrid {
    /// `None` when the cloud's extent over `eps` is too large to address
    /// cells exactly.
    pub fn new(cloud: &PointCloud, eps: f64) -> Option<Self> {
        let k = cloud.k();
        let width = eps * (1.0 + CELL_SLACK);
        let mut origin = vec![f64::INFINITY; k];
        let mut hi = vec![f64::NEG_INFINITY; k];
        for r in cloud.rows() {
            for j in 0..k {
                origin[j] = origin[j].min(r[j]);
                hi[j] = hi[j].max(r[j]);
            }
        }
        if (0..k).any(|j| (hi[j] - origin[j]) / width > MAX_CELL_COORD) {
            return None;
        }
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let mut keys = Vec::with_capacity(cloud.n());
        for (i, r) in cloud.rows().enumerate() {
            let key: Vec<i64> = (0..k).map(|j| ((r[j] - origin[j]) / width).floor() as i64).collect();
            cells.entry(key.clone()).or_default().push(i);
            keys.push(key);
        }
        let mut offsets = vec![Vec::with_capacity(k)];
        for _ in 0..k {
            offsets = offsets
                .into_iter()
                .flat_map(|o| {
                    (-1..=1).map(move |d| {
                        let mut o = o.clone();
                        o.push(d);
                        o
                    })
                })
                .collect();
        }
        Some(UniformGrid {
            origin,
            width,
            cells,
            keys,
            offsets,
        })
    }

    pub fn eps(&self) -> f64 {
        self.width / (1.0 + CELL_SLACK)
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }
}

impl RadiusSearch for UniformGrid {
    fn within(&self, cloud: &PointCloud, query: usize, eps: f64) -> Vec<usize> {
        debug_assert!(eps <= self.eps(), "grid built for a smaller radius");
        let q = cloud.row(query);
        let base = &self.keys[query];
        let mut out = Vec::new();
        let mut key = vec![0i64; base.len()];
        for off in &self.offsets {
            for (slot, (b, o)) in key.iter_mut().zip(base.iter().zip(off)) {
                *slot = b + o;
            }
            if let Some(bucket) = self.cells.get(&key) {
                out.extend(bucket.iter().copied().filter(|&i| euclidean(cloud.row(i), q) <= eps));
            }
        }
        out.sort_unstable();
        out
    }
}

/// Grid when the dimension is small enough for a 3^K scan to pay off,
/// brute force otherwise.
pub fn build_index(cloud: &PointCloud, eps: f64) -> Box<dyn RadiusSearch + Send + Sync> {
    if cloud.k() <= MAX_GRID_DIM && cloud.n() > 64 {
        if let Some(grid) = UniformGrid::new(cloud, eps) {
            return Box::new(grid);
        }
    }
    Box::new(BruteForce)
}
