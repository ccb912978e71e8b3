use std::fmt::Write as _;

use super::{disc_radii, node_colors, RenderConfig};
use crate::error::{Error, Result};
use crate::graph::BallGraph;
use crate::layout::Layout;

const PLOT_SIZE: f64 = 800.0;
const COLORBAR_WIDTH: f64 = 140.0;
const BAR_X: f64 = 30.0;
const BAR_W: f64 = 24.0;
const TICKS: usize = 5;
const BAR_SLICES: usize = 64;

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// SVG 1.1 drawing: edges beneath discs sized by ball size and filled from
/// the colormap, a label with the ball id on each disc, and an optional
/// colorbar on the right.
pub fn render_svg(graph: &BallGraph, layout: &Layout, config: &RenderConfig) -> Result<String> {
    config.validate()?;
    let (colors, (vmin, vmax)) = node_colors(graph, config)?;
    let radii = disc_radii(graph, config);
    let values = graph.coloring(&config.coloring_variable)?;

    let margin = config.max_disc + 10.0;
    let span = PLOT_SIZE - 2.0 * margin;
    let to_px = |(x, y): (f64, f64)| (margin + (x + 1.0) * 0.5 * span, margin + (1.0 - y) * 0.5 * span);
    let mut centers = Vec::with_capacity(graph.len());
    for n in graph.nodes() {
        let p = layout.get(n.id).ok_or(Error::MissingPosition(n.id))?;
        centers.push(to_px(p));
    }
    let center_of = |id: usize| {
        let i = graph
            .nodes()
            .binary_search_by_key(&id, |n| n.id)
            .expect("edge endpoints are graph nodes");
        centers[i]
    };

    let width = PLOT_SIZE + if config.colorbar { COLORBAR_WIDTH } else { 0.0 };
    let mut s = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{PLOT_SIZE:.0}" viewBox="0 0 {width:.0} {PLOT_SIZE:.0}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{width:.0}" height="{PLOT_SIZE:.0}" fill="#ffffff"/>"##
    );

    let _ = writeln!(
        s,
        r##"<g id="edges" stroke="#808080" stroke-width="{:.2}">"##,
        config.edge_width
    );
    for e in graph.edges() {
        let (x1, y1) = center_of(e.a);
        let (x2, y2) = center_of(e.b);
        let _ = writeln!(s, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g id="balls" stroke="#333333" stroke-width="1">"##);
    for (i, n) in graph.nodes().iter().enumerate() {
        let (cx, cy) = centers[i];
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="{}"><title>ball {}: {} points, {} = {}</title></circle>"#,
            radii[i],
            colors[i].hex(),
            n.id,
            n.size,
            esc(&config.coloring_variable),
            values[i].1
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r#"<g id="labels" font-family="sans-serif" font-size="12" text-anchor="middle" dominant-baseline="central">"#
    );
    for (i, n) in graph.nodes().iter().enumerate() {
        let (cx, cy) = centers[i];
        let _ = writeln!(s, r#"<text x="{cx:.2}" y="{cy:.2}">{}</text>"#, n.id);
    }
    let _ = writeln!(s, "</g>");

    if config.colorbar {
        write_colorbar(&mut s, config, vmin, vmax);
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

fn write_colorbar(s: &mut String, config: &RenderConfig, vmin: f64, vmax: f64) {
    let top = 80.0;
    let height = PLOT_SIZE - 2.0 * top;
    let _ = writeln!(s, r#"<g id="colorbar" transform="translate({PLOT_SIZE:.0},0)">"#);
    // Stacked slices rather than a gradient, so the file holds no element
    // whose name starts with `line` besides the edges.
    for i in 0..BAR_SLICES {
        let f = (i as f64 + 0.5) / BAR_SLICES as f64;
        let h = height / BAR_SLICES as f64;
        let y = top + height - (i + 1) as f64 * h;
        let _ = writeln!(
            s,
            r#"<rect x="{BAR_X}" y="{y:.2}" width="{BAR_W}" height="{:.2}" fill="{}"/>"#,
            h + 0.05,
            config.cmap.at(f).hex()
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{BAR_X}" y="{top}" width="{BAR_W}" height="{height}" fill="none" stroke="#333333"/>"##
    );
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let value = vmin + f * (vmax - vmin);
        let y = top + (1.0 - f) * height;
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.2}" width="6" height="1" fill="#333333"/>"##,
            BAR_X + BAR_W,
            y - 0.5
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{y:.2}" font-family="sans-serif" font-size="11" dominant-baseline="central">{value:.3}</text>"#,
            BAR_X + BAR_W + 9.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        BAR_X - 12.0,
        PLOT_SIZE / 2.0,
        BAR_X - 12.0,
        PLOT_SIZE / 2.0,
        esc(config.label())
    );
    let _ = writeln!(s, "</g>");
}
