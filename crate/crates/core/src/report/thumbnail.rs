use std::fmt::Write as _;

use crate::geo::LandUseLayer;
use crate::geometry::Coord;

use super::{close_svg, escape, num, open_svg, ColorMap};

/// Square thumbnail of a layer, north up, fitted to `size` pixels with the
/// aspect ratio preserved. One path per feature; holes use the even-odd rule.
pub fn render_city_thumbnail(layer: &LandUseLayer, colors: &ColorMap, size: u32) -> String {
    let size = size.max(1);
    let s = size as f64;
    let ext = layer.extent();
    let span = ext.width().max(ext.height());
    let scale = if span > 0.0 { s / span } else { 1.0 };
    let ox = (s - ext.width() * scale) / 2.0;
    let oy = (s - ext.height() * scale) / 2.0;
    let map = |p: &Coord| {
        (
            ox + (p[0] - ext.min[0]) * scale,
            s - (oy + (p[1] - ext.min[1]) * scale),
        )
    };

    let mut out = String::new();
    open_svg(&mut out, size, size);
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(&layer.city_name));
    for f in &layer.features {
        let mut d = String::new();
        for ring in f.rings() {
            // rings are closed; the last vertex repeats the first
            let open = &ring[..ring.len().saturating_sub(1)];
            for (i, p) in open.iter().enumerate() {
                let (x, y) = map(p);
                let _ = write!(d, "{}{} {} ", if i == 0 { "M " } else { "L " }, num(x), num(y));
            }
            d.push_str("Z ");
        }
        let _ = writeln!(
            out,
            r##"<path data-id="{}" data-code="{}" d="{}" fill="{}" fill-rule="evenodd" stroke="#ffffff" stroke-width="0.3"/>"##,
            escape(&f.id),
            escape(&f.code),
            d.trim_end(),
            colors.fill_for(&f.code)
        );
    }
    close_svg(&mut out);
    out
}
