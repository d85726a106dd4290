//! Loading and validating polygon land-use layers.
//!
//! Input is a GeoJSON `FeatureCollection` whose features carry Polygon or
//! MultiPolygon geometries in a projected, meter-based CRS. Multipolygons are
//! split so that every polygon part becomes its own feature; the parts get
//! ids suffixed `-0`, `-1`, ...

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{self, BBox, Coord};

pub const DEFAULT_CODE_ATTRIBUTE: &str = "code_2018";

#[derive(Debug, Clone, PartialEq)]
pub struct LandUseFeature {
    pub id: String,
    pub code: String,
    /// Closed ring: the last vertex repeats the first.
    pub exterior: Vec<Coord>,
    pub holes: Vec<Vec<Coord>>,
}

impl LandUseFeature {
    /// Builds a feature, closing any ring that is not already closed.
    pub fn new(
        id: impl Into<String>,
        code: impl Into<String>,
        exterior: Vec<Coord>,
        holes: Vec<Vec<Coord>>,
    ) -> Self {
        LandUseFeature {
            id: id.into(),
            code: code.into(),
            exterior: close_ring(exterior),
            holes: holes.into_iter().map(close_ring).collect(),
        }
    }

    /// Axis-aligned rectangle, handy for fixtures.
    pub fn rect(id: &str, code: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(
            id,
            code,
            vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
            Vec::new(),
        )
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.exterior).unwrap_or(BBox {
            min: [0.0, 0.0],
            max: [0.0, 0.0],
        })
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Coord]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(Vec::as_slice))
    }
}

fn close_ring(mut ring: Vec<Coord>) -> Vec<Coord> {
    if let (Some(first), Some(last)) = (ring.first().copied(), ring.last().copied()) {
        if first != last {
            ring.push(first);
        }
    }
    ring
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandUseLayer {
    pub city_name: String,
    pub features: Vec<LandUseFeature>,
    pub code_attribute: String,
}

impl LandUseLayer {
    pub fn new(
        city_name: impl Into<String>,
        features: Vec<LandUseFeature>,
        code_attribute: impl Into<String>,
    ) -> Result<Self> {
        let city_name = city_name.into();
        if features.is_empty() {
            return Err(Error::EmptyInput(format!("layer {city_name} has no features")));
        }
        Ok(LandUseLayer {
            city_name,
            features,
            code_attribute: code_attribute.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn extent(&self) -> BBox {
        self.features
            .iter()
            .map(LandUseFeature::bbox)
            .reduce(|a, b| a.union(&b))
            .expect("layer is non-empty")
    }

    pub fn distinct_codes(&self) -> BTreeSet<&str> {
        self.features.iter().map(|f| f.code.as_str()).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<(String, String)>,
    pub warnings: Vec<(String, String)>,
    pub feature_count: usize,
    pub distinct_code_count: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn load_feature_collection(
    path: impl AsRef<Path>,
    code_attribute: &str,
    city_name: &str,
) -> Result<LandUseLayer> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_feature_collection(&text, code_attribute, city_name)
        .map_err(|e| match e {
            Error::Malformed { message, .. } => Error::malformed(path, message),
            other => other,
        })
}

/// Same as [`load_feature_collection`] but from an in-memory document.
pub fn parse_feature_collection(
    text: &str,
    code_attribute: &str,
    city_name: &str,
) -> Result<LandUseLayer> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::malformed("<memory>", e.to_string()))?;
    let bad = |msg: &str| Error::malformed("<memory>", msg.to_owned());

    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(bad("top-level object is not a FeatureCollection"));
    }
    let raw_features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("FeatureCollection has no features array"))?;

    let mut features = Vec::new();
    for (index, raw) in raw_features.iter().enumerate() {
        let id = feature_id(raw, index);
        let code = feature_code(raw, &id, code_attribute)?;
        let geometry = raw
            .get("geometry")
            .filter(|g| !g.is_null())
            .ok_or_else(|| Error::UnsupportedGeometry {
                feature: id.clone(),
                kind: "null".into(),
            })?;
        let kind = geometry.get("type").and_then(Value::as_str).unwrap_or("");
        let coords = geometry.get("coordinates");
        match kind {
            "Polygon" => {
                let rings = parse_polygon(coords, &id)?;
                features.push(polygon_feature(id, code, rings));
            }
            "MultiPolygon" => {
                let parts = coords
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad(&format!("feature {id}: MultiPolygon without coordinates")))?;
                for (part_index, part) in parts.iter().enumerate() {
                    let rings = parse_polygon(Some(part), &id)?;
                    features.push(polygon_feature(format!("{id}-{part_index}"), code.clone(), rings));
                }
            }
            other => {
                return Err(Error::UnsupportedGeometry {
                    feature: id,
                    kind: other.to_owned(),
                })
            }
        }
    }
    LandUseLayer::new(city_name, features, code_attribute)
}

fn feature_id(raw: &Value, index: usize) -> String {
    match raw.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => index.to_string(),
    }
}

fn feature_code(raw: &Value, id: &str, code_attribute: &str) -> Result<String> {
    let value = raw
        .get("properties")
        .and_then(|p| p.get(code_attribute))
        .filter(|v| !v.is_null())
        .ok_or_else(|| Error::MissingAttribute {
            feature: id.to_owned(),
            attribute: code_attribute.to_owned(),
        })?;
    let code = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    };
    if code.is_empty() || code.chars().any(char::is_whitespace) {
        return Err(Error::InvalidCode {
            feature: id.to_owned(),
            code,
        });
    }
    Ok(code)
}

fn parse_polygon(coords: Option<&Value>, id: &str) -> Result<Vec<Vec<Coord>>> {
    let bad = |msg: String| Error::malformed("<memory>", format!("feature {id}: {msg}"));
    let rings = coords
        .and_then(Value::as_array)
        .ok_or_else(|| bad("polygon coordinates must be an array of rings".into()))?;
    if rings.is_empty() {
        return Err(bad("polygon has no rings".into()));
    }
    rings
        .iter()
        .map(|ring| {
            ring.as_array()
                .ok_or_else(|| bad("ring is not an array".into()))?
                .iter()
                .map(|pos| {
                    let pos = pos.as_array().filter(|p| p.len() >= 2);
                    match pos.map(|p| (p[0].as_f64(), p[1].as_f64())) {
                        Some((Some(x), Some(y))) => Ok([x, y]),
                        _ => Err(bad("position is not a pair of numbers".into())),
                    }
                })
                .collect()
        })
        .collect()
}

fn polygon_feature(id: String, code: String, mut rings: Vec<Vec<Coord>>) -> LandUseFeature {
    let exterior = rings.remove(0);
    LandUseFeature::new(id, code, exterior, rings)
}

/// Serializes a layer back to a GeoJSON FeatureCollection, one Polygon per
/// feature.
pub fn to_feature_collection(layer: &LandUseLayer) -> Value {
    let ring_json = |ring: &[Coord]| -> Value { ring.iter().map(|p| json!([p[0], p[1]])).collect() };
    let features: Vec<Value> = layer
        .features
        .iter()
        .map(|f| {
            let mut props = Map::new();
            props.insert(layer.code_attribute.clone(), Value::String(f.code.clone()));
            let rings: Vec<Value> = f.rings().map(ring_json).collect();
            json!({
                "type": "Feature",
                "id": f.id,
                "properties": props,
                "geometry": { "type": "Polygon", "coordinates": rings },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

pub fn write_feature_collection(layer: &LandUseLayer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(&to_feature_collection(layer))
        .expect("layer serializes to JSON");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn validate_layer(layer: &LandUseLayer) -> ValidationReport {
    let mut report = ValidationReport {
        feature_count: layer.features.len(),
        distinct_code_count: layer.distinct_codes().len(),
        ..Default::default()
    };

    let mut seen = HashSet::new();
    for f in &layer.features {
        if !seen.insert(f.id.as_str()) {
            report
                .errors
                .push((f.id.clone(), format!("duplicate feature id {:?}", f.id)));
        }
        if f.code.is_empty() || f.code.chars().any(char::is_whitespace) {
            report
                .errors
                .push((f.id.clone(), format!("invalid code {:?}", f.code)));
        }
        for (ring_index, ring) in f.rings().enumerate() {
            let which = if ring_index == 0 {
                "exterior ring".to_owned()
            } else {
                format!("hole {}", ring_index - 1)
            };
            if ring.iter().flatten().any(|c| !c.is_finite()) {
                report
                    .errors
                    .push((f.id.clone(), format!("{which} has non-finite coordinates")));
                continue;
            }
            if geometry::distinct_vertices(ring) < 3 {
                report
                    .errors
                    .push((f.id.clone(), format!("{which} has fewer than 3 distinct vertices")));
                continue;
            }
            if geometry::signed_area(ring) == 0.0 {
                report
                    .errors
                    .push((f.id.clone(), format!("{which} has zero area")));
                continue;
            }
            if geometry::ring_self_intersects(ring) {
                report
                    .warnings
                    .push((f.id.clone(), format!("{which} is self-intersecting")));
            }
        }
    }
    report
}
