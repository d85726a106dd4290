use crate::error::{Error, Result};
use crate::geo::LandUseFeature;
use crate::geometry::{self, ring_segments};

/// Minimum Euclidean distance between two polygons (with holes).
///
/// Zero when the boundaries touch or cross, or when one polygon lies in the
/// interior of the other. A polygon sitting inside another's hole is measured
/// against the hole ring.
pub fn polygon_distance(a: &LandUseFeature, b: &LandUseFeature) -> Result<f64> {
    for f in [a, b] {
        if geometry::distinct_vertices(&f.exterior) < 3 {
            return Err(Error::DegenerateRing {
                feature: f.id.clone(),
            });
        }
    }

    let mut best = f64::INFINITY;
    for ra in a.rings() {
        for (p1, p2) in ring_segments(ra) {
            for rb in b.rings() {
                for (q1, q2) in ring_segments(rb) {
                    let d = geometry::segment_distance(p1, p2, q1, q2);
                    if d < best {
                        best = d;
                        if best == 0.0 {
                            return Ok(0.0);
                        }
                    }
                }
            }
        }
    }

    // Boundaries are disjoint: either nested or apart.
    if geometry::point_in_polygon(a.exterior[0], &b.exterior, &b.holes)
        || geometry::point_in_polygon(b.exterior[0], &a.exterior, &a.holes)
    {
        return Ok(0.0);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(id: &str, x0: f64, y0: f64, side: f64) -> LandUseFeature {
        LandUseFeature::rect(id, "X", x0, y0, x0 + side, y0 + side)
    }

    /// Independent oracle: every vertex against every edge, both ways.
    fn brute_boundary_distance(a: &LandUseFeature, b: &LandUseFeature) -> f64 {
        let mut best = f64::INFINITY;
        for (x, y) in [(a, b), (b, a)] {
            for ring in x.rings() {
                for p in ring {
                    for other in y.rings() {
                        for w in other.windows(2) {
                            best = best.min(geometry::point_segment_distance(*p, w[0], w[1]));
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn shared_edge_is_zero() {
        let a = square("a", 0.0, 0.0, 1.0);
        let b = square("b", 1.0, 0.0, 1.0);
        assert_eq!(polygon_distance(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn five_meter_gap() {
        let a = square("a", 0.0, 0.0, 10.0);
        let b = square("b", 15.0, 0.0, 10.0);
        assert_eq!(brute_boundary_distance(&a, &b), 5.0);
        assert_eq!(polygon_distance(&a, &b).unwrap(), 5.0);
        assert_eq!(polygon_distance(&b, &a).unwrap(), 5.0);
    }

    #[test]
    fn containment_is_zero() {
        let outer = square("outer", 0.0, 0.0, 100.0);
        let inner = square("inner", 40.0, 40.0, 5.0);
        assert_eq!(polygon_distance(&outer, &inner).unwrap(), 0.0);
        assert_eq!(polygon_distance(&inner, &outer).unwrap(), 0.0);
    }

    #[test]
    fn inside_hole_measures_to_hole_ring() {
        let donut = LandUseFeature::new(
            "donut",
            "X",
            vec![[0.0, 0.0], [100.0, 0.0], [100.0, 100.0], [0.0, 100.0]],
            vec![vec![[20.0, 20.0], [80.0, 20.0], [80.0, 80.0], [20.0, 80.0]]],
        );
        let island = square("island", 45.0, 45.0, 10.0);
        assert_eq!(polygon_distance(&donut, &island).unwrap(), 25.0);
        assert_eq!(polygon_distance(&island, &donut).unwrap(), 25.0);
    }

    #[test]
    fn degenerate_ring_rejected() {
        let a = LandUseFeature::new("d", "X", vec![[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]], vec![]);
        let b = square("b", 0.0, 0.0, 1.0);
        assert!(matches!(
            polygon_distance(&a, &b),
            Err(Error::DegenerateRing { feature }) if feature == "d"
        ));
    }

    #[test]
    fn matches_vertex_edge_oracle_on_disjoint_triangles() {
        let a = LandUseFeature::new("a", "X", vec![[0.0, 0.0], [4.0, 1.0], [1.0, 3.0]], vec![]);
        let b = LandUseFeature::new("b", "X", vec![[7.0, 2.0], [9.0, 6.0], [6.0, 5.0]], vec![]);
        let got = polygon_distance(&a, &b).unwrap();
        assert!((got - brute_boundary_distance(&a, &b)).abs() < 1e-12);
    }
}
