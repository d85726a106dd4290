use std::collections::HashMap;

use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};

use crate::error::{Error, Result};
use crate::geo::{LandUseFeature, LandUseLayer};
use crate::geometry::BBox;

use super::distance::polygon_distance;

type Entry = GeomWithData<Rectangle<[f64; 2]>, usize>;

/// Bounding-box R-tree over the features of one layer.
pub struct SpatialIndex<'a> {
    layer: &'a LandUseLayer,
    tree: RTree<Entry>,
    positions: HashMap<&'a str, usize>,
}

impl<'a> SpatialIndex<'a> {
    pub fn build(layer: &'a LandUseLayer) -> Self {
        let entries = layer
            .features
            .iter()
            .enumerate()
            .map(|(pos, f)| {
                let b = f.bbox();
                GeomWithData::new(Rectangle::from_corners(b.min, b.max), pos)
            })
            .collect();
        let positions = layer
            .features
            .iter()
            .enumerate()
            .map(|(pos, f)| (f.id.as_str(), pos))
            .collect();
        SpatialIndex {
            layer,
            tree: RTree::bulk_load(entries),
            positions,
        }
    }

    pub fn layer(&self) -> &'a LandUseLayer {
        self.layer
    }

    pub fn len(&self) -> usize {
        self.tree.size()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.size() == 0
    }

    pub fn position(&self, feature_id: &str) -> Result<usize> {
        self.positions
            .get(feature_id)
            .copied()
            .ok_or_else(|| Error::UnknownFeature(feature_id.to_owned()))
    }

    /// Layer positions of every feature whose bounding box intersects `query`,
    /// ascending.
    pub fn query_positions(&self, query: &BBox) -> Vec<usize> {
        let envelope = AABB::from_corners(query.min, query.max);
        let mut hits: Vec<usize> = self
            .tree
            .locate_in_envelope_intersecting(&envelope)
            .map(|e| e.data)
            .collect();
        hits.sort_unstable();
        hits
    }

    pub fn query(&self, query: &BBox) -> Vec<&'a str> {
        self.query_positions(query)
            .into_iter()
            .map(|p| self.layer.features[p].id.as_str())
            .collect()
    }

    /// Positions of all other features within polygon distance `d` of the
    /// feature at `pos`, ascending.
    pub fn neighbor_positions(&self, pos: usize, d: f64) -> Result<Vec<usize>> {
        check_distance(d)?;
        let feature = &self.layer.features[pos];
        let candidates = self.query_positions(&feature.bbox().inflate(d));
        let mut out = Vec::new();
        for c in candidates {
            if c == pos {
                continue;
            }
            if polygon_distance(feature, &self.layer.features[c])? <= d {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// Ids of every other feature within distance `d` (closed buffer), in
    /// layer order.
    pub fn neighbors_within(&self, feature_id: &str, d: f64) -> Result<Vec<&'a str>> {
        let pos = self.position(feature_id)?;
        Ok(self
            .neighbor_positions(pos, d)?
            .into_iter()
            .map(|p| self.layer.features[p].id.as_str())
            .collect())
    }

    pub fn feature(&self, pos: usize) -> &'a LandUseFeature {
        &self.layer.features[pos]
    }
}

pub(crate) fn check_distance(d: f64) -> Result<()> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "buffer distance must be finite and >= 0, got {d}"
        )))
    }
}
