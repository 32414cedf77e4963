//! Boustrophedon coverage paths over a survey polygon.

use crate::error::{Error, Result};
use crate::pointcloud::{Point2, Polygon2D};

fn lane_intervals(poly: &Polygon2D, u: Point2, w: Point2, c: f64) -> Vec<(f64, f64)> {
    // Crossings of the line {p : p·w = c} with polygon edges, as p·u.
    let mut ts = Vec::new();
    for (a, b) in poly.edges() {
        let (wa, wb) = (a[0] * w[0] + a[1] * w[1], b[0] * w[0] + b[1] * w[1]);
        // Half-open rule on the lower endpoint keeps vertex hits counted once.
        if (wa <= c) != (wb <= c) {
            let t = (c - wa) / (wb - wa);
            let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            ts.push(p[0] * u[0] + p[1] * u[1]);
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

/// Lanes parallel to the longest edge at the centres of `ceil(W / spacing)`
/// equal strips across the polygon's width `W`, visited back and forth, then
/// one loop around the perimeter. Every point of the polygon lies within
/// `spacing / 2` of the path.
pub fn boustrophedon_path(poly: &Polygon2D, spacing: f64) -> Result<Vec<Point2>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Parameter(format!("lane spacing {spacing} must be positive")));
    }
    let (mut best, mut u) = (-1.0, [1.0, 0.0]);
    for (a, b) in poly.edges() {
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = d[0].hypot(d[1]);
        if len > best {
            best = len;
            u = [d[0] / len, d[1] / len];
        }
    }
    let w = [-u[1], u[0]];
    let proj: Vec<f64> = poly.vertices().iter().map(|p| p[0] * w[0] + p[1] * w[1]).collect();
    let w0 = proj.iter().copied().fold(f64::INFINITY, f64::min);
    let w1 = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = w1 - w0;
    let lanes = ((width / spacing).ceil() as usize).max(1);
    if width < spacing {
        log::warn!("lane spacing {spacing} m exceeds polygon width {width} m; using a single lane");
    }
    let at = |c: f64, t: f64| [c * w[0] + t * u[0], c * w[1] + t * u[1]];
    let mut path = Vec::new();
    for k in 0..lanes {
        let c = w0 + (k as f64 + 0.5) * width / lanes as f64;
        let mut iv = lane_intervals(poly, u, w, c);
        if k % 2 == 1 {
            iv.reverse();
            for seg in iv.iter_mut() {
                *seg = (seg.1, seg.0);
            }
        }
        for (t0, t1) in iv {
            path.push(at(c, t0));
            path.push(at(c, t1));
        }
    }
    let verts = poly.vertices();
    let last = path.last().copied().unwrap_or(verts[0]);
    let start = (0..verts.len())
        .min_by(|&a, &b| {
            let da = (verts[a][0] - last[0]).hypot(verts[a][1] - last[1]);
            let db = (verts[b][0] - last[0]).hypot(verts[b][1] - last[1]);
            da.total_cmp(&db)
        })
        .expect("polygon has vertices");
    for m in 0..=verts.len() {
        path.push(verts[(start + m) % verts.len()]);
    }
    Ok(path)
}

pub fn path_length(path: &[Point2]) -> f64 {
    path.windows(2).map(|s| (s[1][0] - s[0][0]).hypot(s[1][1] - s[0][1])).sum()
}

/// `n` points at arc lengths `(i + 1/2) L / n` along the polyline.
pub fn sample_along(path: &[Point2], n: usize) -> Vec<Point2> {
    let total = path_length(path);
    let mut out = Vec::with_capacity(n);
    if path.len() < 2 || total == 0.0 {
        return vec![path.first().copied().unwrap_or([0.0, 0.0]); n];
    }
    let mut seg = 0;
    let mut seg_start = 0.0;
    for i in 0..n {
        let s = (i as f64 + 0.5) * total / n as f64;
        loop {
            let (a, b) = (path[seg], path[seg + 1]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            if s <= seg_start + len || seg + 2 == path.len() {
                let t = if len > 0.0 { ((s - seg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
                out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                break;
            }
            seg_start += len;
            seg += 1;
        }
    }
    out
}

pub fn distance_to_path(p: Point2, path: &[Point2]) -> f64 {
    path.windows(2)
        .map(|s| crate::pointcloud::point_segment_distance(p, s[0], s[1]))
        .fold(f64::INFINITY, f64::min)
}
