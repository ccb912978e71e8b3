use std::fmt::Write as _;

use super::{disc_radii, node_colors, RenderConfig};
use crate::error::Result;
use crate::graph::BallGraph;

// Graphviz measures node width in inches.
const POINTS_PER_INCH: f64 = 72.0;

/// Undirected Graphviz document. Nodes are written in ball-id order with a
/// `width` from the disc radius and a `fillcolor` from the colormap.
pub fn export_dot(graph: &BallGraph, config: &RenderConfig) -> Result<String> {
    config.validate()?;
    let (colors, _) = node_colors(graph, config)?;
    let radii = disc_radii(graph, config);
    let values = graph.coloring(&config.coloring_variable)?;

    let mut s = String::from("graph tdabm {\n");
    s.push_str("  node [shape=circle, style=filled, fixedsize=true];\n");
    for (i, n) in graph.nodes().iter().enumerate() {
        let _ = writeln!(
            s,
            "  {} [label=\"{}\", width={:.4}, fillcolor=\"{}\", tooltip=\"size {}; {}={}\"];",
            n.id,
            n.id,
            2.0 * radii[i] / POINTS_PER_INCH,
            colors[i].hex(),
            n.size,
            config.coloring_variable.replace('"', "\\\""),
            values[i].1
        );
    }
    for e in graph.edges() {
        let _ = writeln!(s, "  {} -- {};", e.a, e.b);
    }
    s.push_str("}\n");
    Ok(s)
}
