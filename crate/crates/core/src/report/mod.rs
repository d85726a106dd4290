//! SVG renderers: similarity heatmap, dendrogram, city thumbnails and the
//! embedding scatter plot. All output is deterministic for equal input.

mod dendrogram;
mod heatmap;
mod scatter;
mod thumbnail;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dendrogram::render_dendrogram;
pub use heatmap::render_heatmap;
pub use scatter::render_scatter;
pub use thumbnail::render_city_thumbnail;

/// Cluster colors, cycled when there are more clusters than entries.
pub const CLUSTER_PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn cluster_color(label: usize) -> &'static str {
    CLUSTER_PALETTE[label % CLUSTER_PALETTE.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn parse(hex: &str) -> Option<Rgb> {
        let h = hex.strip_prefix('#')?;
        if h.len() != 6 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        let c = |i: usize| u8::from_str_radix(&h[i..i + 2], 16).ok();
        Some(Rgb(c(0)?, c(2)?, c(4)?))
    }

    /// Channel-wise linear interpolation, rounded half away from zero.
    pub fn lerp(self, other: Rgb, t: f64) -> Rgb {
        let t = t.clamp(0.0, 1.0);
        let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
        Rgb(mix(self.0, other.0), mix(self.1, other.1), mix(self.2, other.2))
    }

    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

/// Thumbnail fills by land-use code prefix plus the heatmap ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColorMap {
    pub prefixes: Vec<(String, String)>,
    pub unmatched: String,
    pub ramp_low: String,
    pub ramp_high: String,
}

impl Default for ColorMap {
    fn default() -> Self {
        let prefixes = [
            ("1", "#e41a1c"),
            ("11", "#a50f15"),
            ("12", "#f768a1"),
            ("13", "#fc9272"),
            ("14", "#fdae6b"),
            ("2", "#ffd92f"),
            ("3", "#4daf4a"),
            ("4", "#80cdc1"),
            ("5", "#377eb8"),
        ];
        ColorMap {
            prefixes: prefixes
                .iter()
                .map(|(p, c)| (p.to_string(), c.to_string()))
                .collect(),
            unmatched: "#bdbdbd".into(),
            ramp_low: "#0d0887".into(),
            ramp_high: "#f0f921".into(),
        }
    }
}

impl ColorMap {
    pub fn new(prefixes: Vec<(String, String)>, ramp_low: &str, ramp_high: &str) -> Result<Self> {
        let cm = ColorMap {
            prefixes,
            ramp_low: ramp_low.into(),
            ramp_high: ramp_high.into(),
            ..ColorMap::default()
        };
        cm.validate()?;
        Ok(cm)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (prefix, color) in &self.prefixes {
            if !seen.insert(prefix.as_str()) {
                return Err(Error::Config(format!("duplicate color prefix {prefix:?}")));
            }
            if Rgb::parse(color).is_none() {
                return Err(Error::Config(format!("invalid color {color:?} for prefix {prefix:?}")));
            }
        }
        for c in [&self.unmatched, &self.ramp_low, &self.ramp_high] {
            if Rgb::parse(c).is_none() {
                return Err(Error::Config(format!("invalid color {c:?}")));
            }
        }
        Ok(())
    }

    /// Fill of the longest prefix matching `code`, or the unmatched gray.
    pub fn fill_for(&self, code: &str) -> &str {
        self.prefixes
            .iter()
            .filter(|(p, _)| code.starts_with(p.as_str()))
            .max_by_key(|(p, _)| p.len())
            .map_or(self.unmatched.as_str(), |(_, c)| c.as_str())
    }

    /// Heatmap color for similarity `s` in [0, 1]; 1 maps to `ramp_high`.
    pub fn ramp(&self, s: f64) -> String {
        let lo = Rgb::parse(&self.ramp_low).unwrap_or(Rgb(0, 0, 0));
        let hi = Rgb::parse(&self.ramp_high).unwrap_or(Rgb(255, 255, 255));
        lo.lerp(hi, s).hex()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafOrdering {
    #[default]
    Dendrogram,
    Input,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub font_size: u32,
    pub thumbnail_size: u32,
    pub leaf_ordering: LeafOrdering,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            width: 800,
            height: 800,
            margin: 120,
            font_size: 12,
            thumbnail_size: 72,
            leaf_ordering: LeafOrdering::Dendrogram,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.font_size == 0 || self.thumbnail_size == 0 {
            return Err(Error::Config("render dimensions must be positive".into()));
        }
        if 2 * self.margin >= self.width.min(self.height) {
            return Err(Error::Config("margin leaves no drawing area".into()));
        }
        Ok(())
    }
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
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

/// Fixed-precision coordinate; avoids `-0.00`.
pub(crate) fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

pub(crate) fn open_svg(out: &mut String, width: u32, height: u32) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
}

pub(crate) fn close_svg(out: &mut String) {
    out.push_str("</svg>\n");
}

pub fn write_svg(svg: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}
