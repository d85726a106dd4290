use std::collections::BTreeMap;
use std::fmt::Write as _;

use base64::Engine as _;

use crate::clustering::ClusterAssignment;
use crate::embedding::Embedding;
use crate::error::{Error, Result};

use super::{close_svg, cluster_color, escape, num, open_svg, RenderConfig};

/// Maps `v` from `[lo, hi]` onto `[a, b]`; a degenerate range lands mid-way.
fn affine(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

/// Embedding scatter plot colored by cluster. Thumbnails, keyed by city, are
/// embedded as base64 SVG images centered on their points.
pub fn render_scatter(
    e: &Embedding,
    assignment: &ClusterAssignment,
    thumbnails: Option<&BTreeMap<String, String>>,
    cfg: &RenderConfig,
) -> Result<String> {
    cfg.validate()?;
    let labels = e
        .city_names
        .iter()
        .map(|c| {
            assignment
                .label_of(c)
                .ok_or_else(|| Error::LabelMismatch(format!("city {c:?} has no cluster assignment")))
        })
        .collect::<Result<Vec<_>>>()?;

    let margin = cfg.margin as f64;
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let fold = |i: usize, f: fn(f64, f64) -> f64, init: f64| e.coords.iter().map(|c| c[i]).fold(init, f);
    let (x0, x1) = (fold(0, f64::min, f64::INFINITY), fold(0, f64::max, f64::NEG_INFINITY));
    let (y0, y1) = (fold(1, f64::min, f64::INFINITY), fold(1, f64::max, f64::NEG_INFINITY));
    let t = cfg.thumbnail_size as f64;

    let mut out = String::new();
    open_svg(&mut out, cfg.width, cfg.height);
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="{}">"#, cfg.font_size);
    for ((city, c), &label) in e.city_names.iter().zip(&e.coords).zip(&labels) {
        let px = affine(c[0], x0, x1, margin, w - margin);
        let py = affine(c[1], y0, y1, h - margin, margin);
        if let Some(svg) = thumbnails.and_then(|m| m.get(city)) {
            let data = base64::engine::general_purpose::STANDARD.encode(svg.as_bytes());
            let _ = writeln!(
                out,
                r#"<image class="thumbnail" x="{}" y="{}" width="{}" height="{}" xlink:href="data:image/svg+xml;base64,{data}"/>"#,
                num(px - t / 2.0),
                num(py - t / 2.0),
                num(t),
                num(t)
            );
        }
        let fill = cluster_color(label);
        let _ = writeln!(
            out,
            r##"<circle class="city" data-city="{}" data-cluster="{label}" cx="{}" cy="{}" r="6" fill="{fill}" stroke="#ffffff"/>"##,
            escape(city),
            num(px),
            num(py)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{fill}">{}</text>"#,
            num(px + 8.0),
            num(py - 8.0),
            escape(city)
        );
    }
    out.push_str("</g>\n");
    close_svg(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::clustering::CutCriterion;
    use crate::embedding::EmbeddingMethod;
    use crate::report::testutil::{elements, parse};

    fn setup(coords: Vec<[f64; 2]>, labels: Vec<usize>) -> (Embedding, ClusterAssignment) {
        let names: Vec<String> = (0..coords.len()).map(|i| format!("C{i}")).collect();
        let k = labels.iter().max().map_or(0, |m| m + 1);
        (
            Embedding {
                city_names: names.clone(),
                coords,
                method: EmbeddingMethod::Pca,
                seed: None,
            },
            ClusterAssignment {
                leaves: names,
                labels,
                k,
                criterion: CutCriterion::TargetK(k),
            },
        )
    }

    fn centers(svg: &str) -> Vec<(f64, f64, String)> {
        let doc = parse(svg);
        elements(&doc, "circle")
            .iter()
            .map(|c| {
                (
                    c.attribute("cx").unwrap().parse().unwrap(),
                    c.attribute("cy").unwrap().parse().unwrap(),
                    c.attribute("fill").unwrap().to_owned(),
                )
            })
            .collect()
    }

    #[test]
    fn single_city_is_centered() {
        let (e, a) = setup(vec![[3.0, -2.0]], vec![0]);
        let cfg = RenderConfig::default();
        let c = centers(&render_scatter(&e, &a, None, &cfg).unwrap());
        assert_eq!((c[0].0, c[0].1), (400.0, 400.0));
    }

    #[test]
    fn equal_gaps_are_equal_pixels() {
        let (e, a) = setup(vec![[0.0, 0.0], [1.0, 2.0], [2.0, 4.0]], vec![0, 0, 0]);
        let c = centers(&render_scatter(&e, &a, None, &RenderConfig::default()).unwrap());
        assert!(((c[1].0 - c[0].0) - (c[2].0 - c[1].0)).abs() < 0.011);
        assert!(((c[1].1 - c[0].1) - (c[2].1 - c[1].1)).abs() < 0.011);
    }

    #[test]
    fn three_clusters_three_colors() {
        let (e, a) = setup(
            vec![[0.0, 0.0], [1.0, 0.0], [5.0, 5.0], [6.0, 5.0], [9.0, 0.0]],
            vec![0, 0, 1, 1, 2],
        );
        let c = centers(&render_scatter(&e, &a, None, &RenderConfig::default()).unwrap());
        let fills: BTreeSet<_> = c.into_iter().map(|(_, _, f)| f).collect();
        assert_eq!(fills.len(), 3);
    }

    #[test]
    fn thumbnails_embedded_and_missing_city_rejected() {
        let (e, a) = setup(vec![[0.0, 0.0], [1.0, 1.0]], vec![0, 1]);
        let mut thumbs = BTreeMap::new();
        thumbs.insert("C0".to_string(), "<svg xmlns=\"http://www.w3.org/2000/svg\"/>".to_string());
        let svg = render_scatter(&e, &a, Some(&thumbs), &RenderConfig::default()).unwrap();
        let doc = parse(&svg);
        let images = elements(&doc, "image");
        assert_eq!(images.len(), 1);

        let (_, mut partial) = setup(vec![[0.0, 0.0]], vec![0]);
        partial.leaves = vec!["other".into()];
        assert!(render_scatter(&e, &partial, None, &RenderConfig::default()).is_err());
    }
}
