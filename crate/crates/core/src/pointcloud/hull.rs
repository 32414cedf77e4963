//! Simple polygons, convex hulls and area centroids in the (e, n) plane.

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];

#[inline]
pub fn cross2(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise simple polygon, closed implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2D {
    vertices: Vec<Point2>,
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = cross2(c, d, a);
    let d2 = cross2(c, d, b);
    let d3 = cross2(a, b, c);
    let d4 = cross2(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    (d1 == 0.0 && on(c, d, a))
        || (d2 == 0.0 && on(c, d, b))
        || (d3 == 0.0 && on(a, b, c))
        || (d4 == 0.0 && on(a, b, d))
}

impl Polygon2D {
    /// Validates vertex count, simplicity and counter-clockwise orientation.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Degenerate(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::Degenerate("polygon vertex is not finite".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if a == b {
                return Err(Error::Degenerate(format!("polygon repeats vertex {i}")));
            }
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::Degenerate(format!(
                        "polygon edges {i} and {j} intersect"
                    )));
                }
            }
        }
        let p = Polygon2D { vertices };
        if p.signed_area() <= 0.0 {
            return Err(Error::Degenerate(
                "polygon must be counter-clockwise with positive area".into(),
            ));
        }
        Ok(p)
    }

    /// Reverses clockwise input before validating.
    pub fn new_any_orientation(mut vertices: Vec<Point2>) -> Result<Self> {
        if shoelace(&vertices) < 0.0 {
            vertices.reverse();
        }
        Polygon2D::new(vertices)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Even-odd containment; points on the boundary count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        if self.boundary_distance(p) <= 1e-9 {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Positive inside, negative outside.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let d = self.boundary_distance(p);
        if self.contains(p) {
            d
        } else {
            -d
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.edges()
            .map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1]))
            .sum()
    }

    pub fn translated(&self, d: Point2) -> Polygon2D {
        Polygon2D {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v[0] + d[0], v[1] + d[1]])
                .collect(),
        }
    }
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    (p[0] - q[0]).hypot(p[1] - q[1])
}

fn shoelace(v: &[Point2]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    // Relative to the first vertex to limit cancellation at UTM magnitudes.
    let o = v[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        s += cross2(o, v[i], v[i + 1]);
    }
    0.5 * s
}

/// Andrew's monotone chain. Collinear boundary points are dropped; the result
/// starts at the lexicographically smallest point and runs counter-clockwise.
pub fn convex_hull_2d(points: &[Point2]) -> Result<Polygon2D> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "convex hull needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::Degenerate("non-finite point".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    pts.dedup();
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() + 1);
    for &p in pts.iter() {
        while hull.len() >= 2 && cross2(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross2(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 3 {
        return Err(Error::Degenerate("all points are collinear".into()));
    }
    Ok(Polygon2D { vertices: hull })
}

/// Area-weighted centroid via the shoelace formula.
pub fn hull_centroid(poly: &Polygon2D) -> Result<Point2> {
    let v = poly.vertices();
    let o = v[0];
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 1..v.len() - 1 {
        let p = [v[i][0] - o[0], v[i][1] - o[1]];
        let q = [v[i + 1][0] - o[0], v[i + 1][1] - o[1]];
        let c = p[0] * q[1] - q[0] * p[1];
        a2 += c;
        cx += c * (p[0] + q[0]);
        cy += c * (p[1] + q[1]);
    }
    if a2 == 0.0 || !a2.is_finite() {
        return Err(Error::Degenerate("polygon has zero area".into()));
    }
    Ok([o[0] + cx / (3.0 * a2), o[1] + cy / (3.0 * a2)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeSet;

    fn key(p: Point2) -> (u64, u64) {
        (p[0].to_bits(), p[1].to_bits())
    }

    /// O(n³) oracle: a pair is a hull edge when every other point lies on its left
    /// or on the segment between them.
    fn brute_force_hull(pts: &[Point2]) -> BTreeSet<(u64, u64)> {
        let mut out = BTreeSet::new();
        for (i, &a) in pts.iter().enumerate() {
            for (j, &b) in pts.iter().enumerate() {
                if i == j || a == b {
                    continue;
                }
                let supporting = pts.iter().all(|&p| {
                    let c = cross2(a, b, p);
                    c > 0.0 || (c == 0.0 && point_segment_distance(p, a, b) == 0.0)
                });
                if supporting {
                    out.insert(key(a));
                    out.insert(key(b));
                }
            }
        }
        out
    }

    #[test]
    fn square_with_centre() {
        let h = convex_hull_2d(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]).unwrap();
        assert_eq!(h.vertices(), &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn triangle_is_its_own_hull() {
        let h = convex_hull_2d(&[[0.0, 3.0], [3.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(h.len(), 3);
        assert!(h.signed_area() > 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(convex_hull_2d(&[[0.0, 0.0], [1.0, 1.0]]).is_err());
        assert!(convex_hull_2d(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).is_err());
    }

    #[test]
    fn random_hulls_match_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = 3 + trial * 5;
            let pts: Vec<Point2> = (0..n.min(200))
                .map(|_| [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)])
                .collect();
            let h = convex_hull_2d(&pts).unwrap();
            let got: BTreeSet<_> = h.vertices().iter().map(|&p| key(p)).collect();
            assert_eq!(got, brute_force_hull(&pts), "trial {trial}");
            assert!(pts.iter().all(|&p| h.contains(p)));
        }
    }

    #[test]
    fn centroids() {
        let sq = Polygon2D::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let c = hull_centroid(&sq).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] - 0.5).abs() < 1e-15);
        let tri = Polygon2D::new(vec![[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]]).unwrap();
        let c = hull_centroid(&tri).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15 && (c[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn centroid_matches_monte_carlo() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point2> = (0..12)
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let poly = convex_hull_2d(&pts).unwrap();
        let c = hull_centroid(&poly).unwrap();
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for _ in 0..1_000_000 {
            let p = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            if poly.contains(p) {
                sx += p[0];
                sy += p[1];
                n += 1;
            }
        }
        assert!((sx / n as f64 - c[0]).abs() < 1e-3 && (sy / n as f64 - c[1]).abs() < 1e-3,
            "mc ({}, {}) vs {:?}", sx / n as f64, sy / n as f64, c);
    }

    #[test]
    fn polygon_validation() {
        assert!(Polygon2D::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err(), "clockwise");
        assert!(Polygon2D::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).is_err(), "bow tie");
        assert!(Polygon2D::new_any_orientation(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_ok());
    }
}
