//! Colormaps and static exports of a ball graph: SVG, Graphviz DOT, and the
//! JSON document shared with the HTTP service.

mod colormap;
mod dot;
mod json;
mod svg;

pub use colormap::{eval_colormap, ColorMap, ColorStop, Rgb};
pub use dot::export_dot;
pub use json::{export_json, export_value, import_json, GraphDocument, SCHEMA_VERSION};
pub use svg::render_svg;

use crate::error::{Error, Result};
use crate::graph::BallGraph;

/// Fraction of the observed coloring range added below and above it when
/// `vmin`/`vmax` are not given.
pub const DEFAULT_RANGE_BUFFER: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub coloring_variable: String,
    pub cmap: ColorMap,
    pub colorbar: bool,
    /// Defaults to the coloring name.
    pub colorbar_label: Option<String>,
    pub vmin: Option<f64>,
    pub vmax: Option<f64>,
    /// Disc radii in output units for the smallest and largest ball.
    pub min_disc: f64,
    pub max_disc: f64,
    pub edge_width: f64,
}

impl RenderConfig {
    pub fn new(coloring_variable: impl Into<String>) -> Self {
        RenderConfig {
            coloring_variable: coloring_variable.into(),
            cmap: ColorMap::reds(),
            colorbar: true,
            colorbar_label: None,
            vmin: None,
            vmax: None,
            min_disc: 12.0,
            max_disc: 40.0,
            edge_width: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let (Some(lo), Some(hi)) = (self.vmin, self.vmax) {
            if !(lo < hi) {
                return Err(Error::InvalidConfig(format!("vmin ({lo}) must be below vmax ({hi})")));
            }
        }
        for v in [self.vmin, self.vmax].into_iter().flatten() {
            if !v.is_finite() {
                return Err(Error::InvalidConfig("vmin/vmax must be finite".into()));
            }
        }
        if !(self.min_disc > 0.0 && self.min_disc <= self.max_disc && self.max_disc.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "disc radii must satisfy 0 < min ({}) <= max ({})",
                self.min_disc, self.max_disc
            )));
        }
        if !(self.edge_width > 0.0 && self.edge_width.is_finite()) {
            return Err(Error::InvalidConfig("edge width must be positive".into()));
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        self.colorbar_label.as_deref().unwrap_or(&self.coloring_variable)
    }

    /// The `(vmin, vmax)` window used for `values`: explicit bounds where
    /// given, otherwise the observed extremes widened by
    /// [`DEFAULT_RANGE_BUFFER`] of the range.
    pub fn color_window(&self, values: &[f64]) -> Result<(f64, f64)> {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if values.is_empty() { (0.0, 0.0) } else { (lo, hi) };
        let pad = (hi - lo) * DEFAULT_RANGE_BUFFER;
        let vmin = self.vmin.unwrap_or(lo - pad);
        let vmax = self.vmax.unwrap_or(hi + pad);
        if vmin > vmax {
            return Err(Error::InvalidConfig(format!(
                "color window is empty: vmin {vmin} > vmax {vmax}"
            )));
        }
        Ok((vmin, vmax))
    }
}

/// Disc radius for each node: sizes mapped affinely from their observed
/// range onto `[min_disc, max_disc]`, or the midpoint when all sizes agree.
pub(crate) fn disc_radii(graph: &BallGraph, config: &RenderConfig) -> Vec<f64> {
    let sizes: Vec<f64> = graph.nodes().iter().map(|n| n.size as f64).collect();
    let lo = sizes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sizes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    sizes
        .iter()
        .map(|&s| {
            if hi > lo {
                config.min_disc + (s - lo) / (hi - lo) * (config.max_disc - config.min_disc)
            } else {
                0.5 * (config.min_disc + config.max_disc)
            }
        })
        .collect()
}

/// Node fill colors in node order, with the window that produced them.
pub(crate) fn node_colors(graph: &BallGraph, config: &RenderConfig) -> Result<(Vec<Rgb>, (f64, f64))> {
    let values: Vec<f64> = graph
        .coloring(&config.coloring_variable)?
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    let window = config.color_window(&values)?;
    let colors = values
        .iter()
        .map(|&v| eval_colormap(&config.cmap, v, window.0, window.1))
        .collect();
    Ok((colors, window))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_window_has_five_percent_buffer() {
        let cfg = RenderConfig::new("y");
        let (lo, hi) = cfg.color_window(&[0.0, 10.0, 4.0]).unwrap();
        assert_eq!((lo, hi), (-0.5, 10.5));
        let pinned = RenderConfig {
            vmin: Some(-2.0),
            vmax: Some(2.0),
            ..cfg.clone()
        };
        assert_eq!(pinned.color_window(&[0.0, 10.0]).unwrap(), (-2.0, 2.0));
        let half = RenderConfig {
            vmin: Some(20.0),
            ..cfg
        };
        assert!(half.color_window(&[0.0, 10.0]).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = RenderConfig::new("y");
        assert!(ok.validate().is_ok());
        assert!(RenderConfig {
            vmin: Some(1.0),
            vmax: Some(1.0),
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(RenderConfig {
            min_disc: 50.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(RenderConfig {
            min_disc: 0.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(RenderConfig { edge_width: 0.0, ..ok }.validate().is_err());
    }
}
