//! Ball mapper for multivariate point clouds.
//!
//! The pipeline is: [`ingest`] a CSV into a [`PointCloud`], [`cover`] it with
//! closed ε-balls around landmarks chosen from the points that are still
//! uncovered, turn the cover into a [`BallGraph`] whose nodes are balls and
//! whose edges are non-empty intersections, place it with a seeded
//! [`layout`], and [`render`] it. [`stability`] repeats the cover under row
//! permutations and checks that stated conclusions survive every reordering.
//!
//! Distances are plain Euclidean on whatever values the cloud holds, so
//! standardize axes first ([`ingest::standardize`]) when they are on different
//! scales. The cover never does it for you.
//!
//! ```
//! use tdabm::{build_cover, build_graph, ColoringVariable, CoverConfig, PointCloud};
//!
//! let cloud = PointCloud::new(vec![vec![0.0], vec![0.8], vec![1.6]], vec!["x".into()]).unwrap();
//! let y = ColoringVariable::new("y", vec![1.0, 2.0, 3.0]).unwrap();
//! let cover = build_cover(&cloud, &CoverConfig::sequential(1.0)).unwrap();
//! let graph = build_graph(&cover, &y).unwrap();
//! assert_eq!(cover.len(), 2);
//! assert_eq!(graph.edges().len(), 1);
//! ```

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cover;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod layout;
pub mod neighbors;
pub mod render;
pub mod rng;
pub mod stability;
pub mod stats;

pub use cover::{assert_cover_valid, build_cover, Ball, Cover, CoverConfig, LandmarkPolicy};
pub use error::{Error, Result};
pub use graph::{
    add_coloring, ball_summary, build_graph, color_by_variable, filter_by, points_and_balls, BallGraph, BallNode,
    BallSummary, Edge, PointsAndBalls,
};
pub use ingest::{ColoringVariable, DatasetSpec, PointCloud};
pub use layout::{spring_layout, Layout, LayoutConfig};
pub use render::{ColorMap, RenderConfig, Rgb};

pub use stability::{ball_count_distribution, parse_claim, run_stability, Claim, StabilityReport};
