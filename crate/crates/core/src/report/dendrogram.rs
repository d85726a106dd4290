use std::fmt::Write as _;

use crate::clustering::{cut_by_distance, Dendrogram};
use crate::error::Result;

use super::{close_svg, cluster_color, escape, num, open_svg, RenderConfig};

const LINK_COLOR: &str = "#333333";

/// Orthogonal dendrogram with leaves along the bottom and merge heights to
/// scale. With a cut height, subtrees below the cut take their cluster color
/// and a dashed line marks the cut.
pub fn render_dendrogram(dendro: &Dendrogram, cut: Option<f64>, cfg: &RenderConfig) -> Result<String> {
    cfg.validate()?;
    let n = dendro.len();
    let margin = cfg.margin as f64;
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let base = h - margin;
    let top = margin / 2.0;

    let root_height = dendro.merges.last().map_or(0.0, |m| m.height);
    let cut = cut.filter(|c| c.is_finite() && *c >= 0.0);
    let scale_max = root_height.max(cut.unwrap_or(0.0)) * 1.05;
    let y_of = |v: f64| {
        if scale_max > 0.0 {
            base - v / scale_max * (base - top)
        } else {
            base
        }
    };

    let order = dendro.leaf_order();
    let step = (w - 2.0 * margin) / n.max(1) as f64;
    let mut x = vec![0.0; n + dendro.merges.len()];
    let mut y = vec![base; n + dendro.merges.len()];
    for (slot, &leaf) in order.iter().enumerate() {
        x[leaf] = margin + (slot as f64 + 0.5) * step;
    }

    // cluster color of every node, None above the cut
    let mut color: Vec<Option<&str>> = vec![None; n + dendro.merges.len()];
    if let Some(c) = cut {
        let assignment = cut_by_distance(dendro, c)?;
        for leaf in 0..n {
            color[leaf] = Some(cluster_color(assignment.labels[leaf]));
        }
    }

    let mut out = String::new();
    open_svg(&mut out, cfg.width, cfg.height);
    let _ = writeln!(
        out,
        r#"<g font-family="sans-serif" font-size="{}" fill="none" stroke-width="1.5">"#,
        cfg.font_size
    );
    for (t, m) in dendro.merges.iter().enumerate() {
        let node = n + t;
        x[node] = (x[m.left] + x[m.right]) / 2.0;
        y[node] = y_of(m.height);
        if cut.is_some_and(|c| m.height <= c) {
            color[node] = color[m.left];
        }
        let stroke = color[node].unwrap_or(LINK_COLOR);
        let _ = writeln!(
            out,
            r#"<path class="link" data-node="{node}" data-height="{}" d="M {} {} V {} H {} V {}" stroke="{stroke}"/>"#,
            m.height,
            num(x[m.left]),
            num(y[m.left]),
            num(y[node]),
            num(x[m.right]),
            num(y[m.right])
        );
    }
    if let Some(c) = cut {
        let _ = writeln!(
            out,
            r##"<line class="cut" data-height="{c}" x1="{}" y1="{yc}" x2="{}" y2="{yc}" stroke="#d62728" stroke-dasharray="6 4"/>"##,
            num(margin / 2.0),
            num(w - margin / 2.0),
            yc = num(y_of(c))
        );
    }
    out.push_str("</g>\n");
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="{}">"#, cfg.font_size);
    for leaf in order {
        let fill = color[leaf].unwrap_or(LINK_COLOR);
        let _ = writeln!(
            out,
            r#"<text class="leaf" x="{lx}" y="{ly}" fill="{fill}" text-anchor="end" transform="rotate(-60 {lx} {ly})">{}</text>"#,
            escape(&dendro.leaves[leaf]),
            lx = num(x[leaf]),
            ly = num(base + 6.0)
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="axis" x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">merge height</text>"#,
        num(margin / 3.0),
        num((base + top) / 2.0),
        num(margin / 3.0),
        num((base + top) / 2.0)
    );
    out.push_str("</g>\n");
    close_svg(&mut out);
    Ok(out)
}
