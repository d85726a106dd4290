use std::fmt::Write as _;

use crate::embedding::DistanceMatrix;
use crate::error::{Error, Result};

use super::{close_svg, escape, num, open_svg, ColorMap, RenderConfig};

/// Similarity heatmap, `s = 1 - d / max(d)`, brightest on the diagonal.
///
/// `order` lists the labels in display order; `None` keeps the matrix order.
/// A matrix of all zeros renders every cell at the bright end.
pub fn render_heatmap(
    dist: &DistanceMatrix,
    order: Option<&[String]>,
    colors: &ColorMap,
    cfg: &RenderConfig,
) -> Result<String> {
    cfg.validate()?;
    let n = dist.len();
    let idx: Vec<usize> = match order {
        None => (0..n).collect(),
        Some(order) => {
            let mut idx = Vec::with_capacity(order.len());
            for label in order {
                let i = dist
                    .labels
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| Error::LabelMismatch(format!("{label:?} not in distance matrix")))?;
                idx.push(i);
            }
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != n || idx.len() != n {
                return Err(Error::LabelMismatch(
                    "heatmap order is not a permutation of the matrix labels".into(),
                ));
            }
            idx
        }
    };
    let max = dist.max();
    let margin = cfg.margin as f64;
    let side = (cfg.width.min(cfg.height) as f64 - 2.0 * margin).max(1.0);
    let cell = if n == 0 { side } else { side / n as f64 };

    let mut out = String::new();
    open_svg(&mut out, cfg.width, cfg.height);
    let _ = writeln!(
        out,
        r#"<g font-family="sans-serif" font-size="{}">"#,
        cfg.font_size
    );
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            let s = if max > 0.0 { 1.0 - dist.get(i, j) / max } else { 1.0 };
            let _ = writeln!(
                out,
                r#"<rect class="cell" data-row="{r}" data-col="{c}" data-similarity="{s:.6}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                num(margin + c as f64 * cell),
                num(margin + r as f64 * cell),
                num(cell),
                num(cell),
                colors.ramp(s)
            );
        }
    }
    for (r, &i) in idx.iter().enumerate() {
        let label = escape(&dist.labels[i]);
        let mid = margin + (r as f64 + 0.5) * cell;
        let _ = writeln!(
            out,
            r#"<text class="row-label" x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{label}</text>"#,
            num(margin - 4.0),
            num(mid)
        );
        let _ = writeln!(
            out,
            r#"<text class="col-label" x="{x}" y="{y}" text-anchor="start" transform="rotate(-90 {x} {y})">{label}</text>"#,
            x = num(mid),
            y = num(margin - 4.0)
        );
    }
    out.push_str("</g>\n");
    close_svg(&mut out);
    Ok(out)
}
