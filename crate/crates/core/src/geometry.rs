//! Planar primitives shared by validation and the neighborhood search.
//!
//! All coordinates are projected meters; nothing here is geodesic.

pub type Coord = [f64; 2];

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Coord,
    pub max: Coord,
}

impl BBox {
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Coord>) -> Option<BBox> {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        let mut bbox = BBox {
            min: first,
            max: first,
        };
        for p in iter {
            bbox.min[0] = bbox.min[0].min(p[0]);
            bbox.min[1] = bbox.min[1].min(p[1]);
            bbox.max[0] = bbox.max[0].max(p[0]);
            bbox.max[1] = bbox.max[1].max(p[1]);
        }
        Some(bbox)
    }

    pub fn inflate(&self, d: f64) -> BBox {
        BBox {
            min: [self.min[0] - d, self.min[1] - d],
            max: [self.max[0] + d, self.max[1] + d],
        }
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min[0] <= other.max[0]
            && other.min[0] <= self.max[0]
            && self.min[1] <= other.max[1]
            && other.min[1] <= self.max[1]
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            min: [self.min[0].min(other.min[0]), self.min[1].min(other.min[1])],
            max: [self.max[0].max(other.max[0]), self.max[1].max(other.max[1])],
        }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }
}

/// Signed shoelace area of a ring; positive for counter-clockwise rings.
/// Works for closed and open rings alike.
pub fn signed_area(ring: &[Coord]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    acc / 2.0
}

/// Number of distinct vertices in a ring (exact comparison).
pub fn distinct_vertices(ring: &[Coord]) -> usize {
    let mut seen: Vec<Coord> = Vec::with_capacity(ring.len());
    for p in ring {
        if !seen.iter().any(|q| q == p) {
            seen.push(*p);
        }
    }
    seen.len()
}

/// Iterates the edges of a closed ring (last vertex equal to the first).
pub fn ring_segments(ring: &[Coord]) -> impl Iterator<Item = (Coord, Coord)> + '_ {
    ring.windows(2).map(|w| (w[0], w[1]))
}

fn cross(o: Coord, a: Coord, b: Coord) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: Coord, a: Coord, b: Coord) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test, including touching endpoints and
/// collinear overlap.
pub fn segments_intersect(p1: Coord, p2: Coord, q1: Coord, q2: Coord) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

pub fn point_segment_distance(p: Coord, a: Coord, b: Coord) -> f64 {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let cx = a[0] + t * dx - p[0];
    let cy = a[1] + t * dy - p[1];
    (cx * cx + cy * cy).sqrt()
}

pub fn segment_distance(p1: Coord, p2: Coord, q1: Coord, q2: Coord) -> f64 {
    if segments_intersect(p1, p2, q1, q2) {
        return 0.0;
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

/// Even-odd crossing test. Points exactly on the boundary may land on
/// either side; callers handle boundary contact separately.
pub fn point_in_ring(p: Coord, ring: &[Coord]) -> bool {
    let mut inside = false;
    for (a, b) in ring_segments(ring) {
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// True when `p` lies in the exterior ring and in none of the holes.
pub fn point_in_polygon(p: Coord, exterior: &[Coord], holes: &[Vec<Coord>]) -> bool {
    point_in_ring(p, exterior) && !holes.iter().any(|h| point_in_ring(p, h))
}

/// Reports whether two non-adjacent edges of a closed ring touch or cross.
pub fn ring_self_intersects(ring: &[Coord]) -> bool {
    let segs: Vec<(Coord, Coord)> = ring_segments(ring).collect();
    let m = segs.len();
    for i in 0..m {
        for j in (i + 2)..m {
            // first and last edges share the closing vertex
            if i == 0 && j == m - 1 {
                continue;
            }
            let (a1, a2) = segs[i];
            let (b1, b2) = segs[j];
            if segments_intersect(a1, a2, b1, b2) {
                return true;
            }
        }
    }
    false
}
