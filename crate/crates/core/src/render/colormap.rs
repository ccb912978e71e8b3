use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

/// A stop of a piecewise-linear colormap; channels are 0-255.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorStop {
    pub t: f64,
    pub rgb: [f64; 3],
}

/// Piecewise-linear map from `[0, 1]` to RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    name: String,
    stops: Vec<ColorStop>,
}

impl ColorMap {
    /// Stops must start at `t = 0`, end at `t = 1`, and strictly increase.
    pub fn new(name: impl Into<String>, stops: Vec<ColorStop>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidColorMap(msg));
        if stops.len() < 2 {
            return bad("at least two stops are required".into());
        }
        if stops[0].t != 0.0 || stops[stops.len() - 1].t != 1.0 {
            return bad("stops must start at t=0 and end at t=1".into());
        }
        if stops.windows(2).any(|w| !(w[0].t < w[1].t)) {
            return bad("stop positions must be strictly increasing".into());
        }
        for s in &stops {
            if s.rgb.iter().any(|c| !(0.0..=255.0).contains(c)) {
                return bad(format!("channel out of 0-255 at t={}", s.t));
            }
        }
        Ok(ColorMap {
            name: name.into(),
            stops,
        })
    }

    fn fixed(name: &str, colors: &[[u8; 3]]) -> Self {
        let last = (colors.len() - 1) as f64;
        let stops = colors
            .iter()
            .enumerate()
            .map(|(i, c)| ColorStop {
                t: i as f64 / last,
                rgb: [c[0] as f64, c[1] as f64, c[2] as f64],
            })
            .collect();
        ColorMap {
            name: name.into(),
            stops,
        }
    }

    /// Sequential white to dark red (the ColorBrewer "Reds" ramp).
    pub fn reds() -> Self {
        Self::fixed(
            "reds",
            &[
                [255, 245, 240],
                [254, 224, 210],
                [252, 187, 161],
                [252, 146, 114],
                [251, 106, 74],
                [239, 59, 44],
                [203, 24, 29],
                [165, 15, 21],
                [103, 0, 13],
            ],
        )
    }

    /// Hue sweep red, yellow, green, cyan, blue, magenta.
    pub fn rainbow() -> Self {
        Self::fixed(
            "rainbow",
            &[
                [255, 0, 0],
                [255, 255, 0],
                [0, 255, 0],
                [0, 255, 255],
                [0, 0, 255],
                [255, 0, 255],
            ],
        )
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "reds" => Some(Self::reds()),
            "rainbow" => Some(Self::rainbow()),
            _ => None,
        }
    }

    /// Parses a JSON array of `{"t": .., "rgb": [r, g, b]}`.
    pub fn from_json(name: impl Into<String>, json: &str) -> Result<Self> {
        let stops: Vec<ColorStop> = serde_json::from_str(json).map_err(|e| Error::InvalidColorMap(e.to_string()))?;
        Self::new(name, stops)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Self::from_json(name, &text)
    }

    /// A built-in name, or else a path to a stop-list file.
    pub fn resolve(spec: &str) -> Result<Self> {
        match Self::builtin(spec) {
            Some(m) => Ok(m),
            None => Self::load(spec),
        }
    }

    /// Two maps joined at `threshold`: `below` squeezed onto `[0, threshold]`
    /// and `above` onto `[threshold, 1]`, with a hard jump at the threshold.
    pub fn split_at(name: impl Into<String>, threshold: f64, below: &ColorMap, above: &ColorMap) -> Result<Self> {
        const JUMP: f64 = 1e-9;
        if !(threshold > JUMP && threshold < 1.0 - JUMP) {
            return Err(Error::InvalidColorMap(format!(
                "split threshold must lie inside (0, 1), got {threshold}"
            )));
        }
        let mut stops: Vec<ColorStop> = below
            .stops
            .iter()
            .map(|s| ColorStop {
                t: s.t * threshold,
                rgb: s.rgb,
            })
            .collect();
        let start = threshold + JUMP;
        stops.extend(above.stops.iter().map(|s| ColorStop {
            t: if s.t == 1.0 { 1.0 } else { start + s.t * (1.0 - start) },
            rgb: s.rgb,
        }));
        Self::new(name, stops)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stops(&self) -> &[ColorStop] {
        &self.stops
    }

    /// Color at `t`, clamped to `[0, 1]`. Channels round half up.
    pub fn at(&self, t: f64) -> Rgb {
        let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
        let hi = self
            .stops
            .iter()
            .position(|s| s.t >= t)
            .unwrap_or(self.stops.len() - 1)
            .max(1);
        let (a, b) = (&self.stops[hi - 1], &self.stops[hi]);
        let f = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        let ch = |i: usize| {
            let v = a.rgb[i] + f * (b.rgb[i] - a.rgb[i]);
            (v + 0.5).floor().clamp(0.0, 255.0) as u8
        };
        Rgb(ch(0), ch(1), ch(2))
    }
}

/// Maps `value` through `cmap` over the window `[vmin, vmax]`. A zero-width
/// window maps everything to the middle of the map.
pub fn eval_colormap(cmap: &ColorMap, value: f64, vmin: f64, vmax: f64) -> Rgb {
    let t = if vmax > vmin {
        (value - vmin) / (vmax - vmin)
    } else {
        0.5
    };
    cmap.at(t)
}
