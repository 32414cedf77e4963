//! Analytic meshes with known volumes, and synthetic bank geometry.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{dist, Vec3};
use crate::mesh::{Frame, TriMesh};
use crate::pointcloud::{Point2, Polygon2D};

/// Regular `n`-gon with the given circumradius, first vertex on +x.
pub fn regular_polygon(n: usize, circumradius: f64) -> Result<Polygon2D> {
    let v = (0..n)
        .map(|k| {
            let a = TAU * k as f64 / n as f64;
            [circumradius * a.cos(), circumradius * a.sin()]
        })
        .collect();
    Polygon2D::new(v)
}

fn outward_normal(a: Point2, b: Point2) -> Point2 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l = d[0].hypot(d[1]);
    [d[1] / l, -d[0] / l]
}

/// Vertex `i` of the polygon offset outward by `d` (mitred).
pub fn offset_vertex(poly: &Polygon2D, i: usize, d: f64) -> Point2 {
    let v = poly.vertices();
    let n = v.len();
    let p = v[i % n];
    let n0 = outward_normal(v[(i + n - 1) % n], p);
    let n1 = outward_normal(p, v[(i + 1) % n]);
    let k = d / (1.0 + n0[0] * n1[0] + n0[1] * n1[1]);
    [p[0] + k * (n0[0] + n1[0]), p[1] + k * (n0[1] + n1[1])]
}

/// Convex polygon moved inward by `d` along every edge.
pub fn inset_polygon(poly: &Polygon2D, d: f64) -> Result<Polygon2D> {
    Polygon2D::new((0..poly.len()).map(|i| offset_vertex(poly, i, -d)).collect())
}

/// Closed solid between the bowl `z = -d0 (1 - r²/R²)` and the lid `z = 0`,
/// on a polar grid with `segments` around and `rings` radial steps. Normals
/// face outward.
pub fn paraboloid_lake_mesh(radius: f64, depth: f64, segments: usize, rings: usize) -> Result<TriMesh> {
    if !(radius > 0.0 && depth > 0.0) || segments < 3 || rings < 1 {
        return Err(Error::Parameter("paraboloid lake needs R, d0 > 0, >= 3 segments, >= 1 ring".into()));
    }
    let mut v: Vec<Vec3> = Vec::new();
    let mut f: Vec<[u32; 3]> = Vec::new();
    // Bowl: centre, rings 1..=rings; the last ring is the rim at z = 0.
    v.push([0.0, 0.0, -depth]);
    let ring_start = |r: usize| 1 + (r - 1) * segments;
    for r in 1..=rings {
        let rho = radius * r as f64 / rings as f64;
        let z = if r == rings { 0.0 } else { -depth * (1.0 - (rho / radius).powi(2)) };
        for s in 0..segments {
            let a = TAU * s as f64 / segments as f64;
            v.push([rho * a.cos(), rho * a.sin(), z]);
        }
    }
    let id = |r: usize, s: usize| (ring_start(r) + s % segments) as u32;
    for s in 0..segments {
        f.push([0, id(1, s + 1), id(1, s)]);
    }
    for r in 1..rings {
        for s in 0..segments {
            f.push([id(r, s), id(r, s + 1), id(r + 1, s + 1)]);
            f.push([id(r, s), id(r + 1, s + 1), id(r + 1, s)]);
        }
    }
    // Lid: a fan from a centre vertex over the rim.
    let lid = v.len() as u32;
    v.push([0.0, 0.0, 0.0]);
    for s in 0..segments {
        f.push([lid, id(rings, s), id(rings, s + 1)]);
    }
    TriMesh::new(v, f, Frame::Local)
}

/// Capacity of the paraboloid bowl below `level` (relative to the rim).
pub fn paraboloid_capacity(radius: f64, depth: f64, level: f64) -> f64 {
    let h = (level + depth).clamp(0.0, depth);
    0.5 * std::f64::consts::PI * radius * radius * depth * (h / depth).powi(2)
}

/// Axis-aligned box with outward normals.
pub fn box_mesh(lo: Vec3, hi: Vec3) -> TriMesh {
    let v = (0..8)
        .map(|c| {
            [
                if c & 1 == 0 { lo[0] } else { hi[0] },
                if c & 2 == 0 { lo[1] } else { hi[1] },
                if c & 4 == 0 { lo[2] } else { hi[2] },
            ]
        })
        .collect();
    let quads = [[0, 4, 6, 2], [1, 3, 7, 5], [0, 1, 5, 4], [2, 6, 7, 3], [0, 2, 3, 1], [4, 5, 7, 6]];
    let f = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
    TriMesh { vertices: v, faces: f, frame: Frame::Local }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankGeometry {
    /// Polygon edges `first..last` (indices taken modulo the vertex count).
    pub first_edge: usize,
    pub last_edge: usize,
    /// Rise over run.
    pub slope: f64,
    pub height: f64,
    /// Horizontal standoff from the survey polygon to the toe.
    pub gap: f64,
}

/// Strip mesh rising outward from a toe line at `gap` outside the polygon edges
/// (at `toe_z`) to `height` above it, with cells about `step` meters wide.
pub fn bank_strip(poly: &Polygon2D, b: &BankGeometry, toe_z: f64, step: f64) -> Result<TriMesh> {
    if !(b.slope > 0.0 && b.height > 0.0 && b.gap >= 0.0 && step > 0.0) || b.last_edge <= b.first_edge {
        return Err(Error::Parameter("bank needs slope, height > 0, gap >= 0 and a non-empty edge range".into()));
    }
    let width = b.height / b.slope;
    let rows = ((width / step).ceil() as usize).max(1);
    let mut toe: Vec<Point2> = Vec::new();
    let mut outer: Vec<Point2> = Vec::new();
    for e in b.first_edge..b.last_edge {
        let (t0, t1) = (offset_vertex(poly, e, b.gap), offset_vertex(poly, e + 1, b.gap));
        let (o0, o1) = (offset_vertex(poly, e, b.gap + width), offset_vertex(poly, e + 1, b.gap + width));
        let m = (((t1[0] - t0[0]).hypot(t1[1] - t0[1]) / step).ceil() as usize).max(1);
        let start = if e == b.first_edge { 0 } else { 1 };
        for k in start..=m {
            let t = k as f64 / m as f64;
            toe.push([t0[0] + t * (t1[0] - t0[0]), t0[1] + t * (t1[1] - t0[1])]);
            outer.push([o0[0] + t * (o1[0] - o0[0]), o0[1] + t * (o1[1] - o0[1])]);
        }
    }
    let cols = toe.len();
    let mut v = Vec::with_capacity(cols * (rows + 1));
    for r in 0..=rows {
        let s = r as f64 / rows as f64;
        for c in 0..cols {
            v.push([
                toe[c][0] + s * (outer[c][0] - toe[c][0]),
                toe[c][1] + s * (outer[c][1] - toe[c][1]),
                toe_z + s * b.height,
            ]);
        }
    }
    let id = |r: usize, c: usize| (r * cols + c) as u32;
    let mut f = Vec::new();
    for r in 0..rows {
        for c in 0..cols - 1 {
            // Toe runs counter-clockwise around the lake; this winding faces up.
            f.push([id(r, c), id(r + 1, c + 1), id(r, c + 1)]);
            f.push([id(r, c), id(r + 1, c), id(r + 1, c + 1)]);
        }
    }
    TriMesh::new(v, f, Frame::Local)
}

/// Face labels of injected artifacts, as indices into the final bank mesh.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArtifactLabels {
    pub long_edge: Vec<usize>,
    pub reflection: Vec<usize>,
    pub floating: Vec<usize>,
}

impl ArtifactLabels {
    pub fn all(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .long_edge
            .iter()
            .chain(&self.reflection)
            .chain(&self.floating)
            .copied()
            .collect();
        v.sort_unstable();
        v
    }

    pub fn is_empty(&self) -> bool {
        self.long_edge.is_empty() && self.reflection.is_empty() && self.floating.is_empty()
    }
}

/// Appends `other` to `mesh`, returning the indices of the appended faces.
pub fn append_mesh(mesh: &mut TriMesh, other: &TriMesh) -> Vec<usize> {
    let base = mesh.vertices.len() as u32;
    let first = mesh.faces.len();
    mesh.vertices.extend_from_slice(&other.vertices);
    mesh.faces.extend(other.faces.iter().map(|f| f.map(|i| i + base)));
    (first..mesh.faces.len()).collect()
}

/// Mirror image of the given faces about `z = mirror_z`, lowered by `drop`,
/// like a reflection in the water reconstructed as geometry.
pub fn reflection_patch(src: &TriMesh, faces: &[usize], mirror_z: f64, drop: f64) -> TriMesh {
    let mut keep = vec![false; src.faces.len()];
    for &f in faces {
        keep[f] = true;
    }
    let part = src.retain_faces(&keep);
    TriMesh {
        vertices: part.vertices.iter().map(|v| [v[0], v[1], 2.0 * mirror_z - v[2] - drop]).collect(),
        faces: part.faces.iter().map(|f| [f[0], f[2], f[1]]).collect(),
        frame: src.frame,
    }
}

/// Flat patch of `n`×`n` square cells with its lower corner at `at`.
pub fn floating_patch(at: Vec3, cell: f64, n: usize) -> TriMesh {
    let mut v = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            v.push([at[0] + i as f64 * cell, at[1] + j as f64 * cell, at[2]]);
        }
    }
    let id = |i: usize, j: usize| (i + (n + 1) * j) as u32;
    let mut f = Vec::new();
    for j in 0..n {
        for i in 0..n {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh { vertices: v, faces: f, frame: Frame::Local }
}

/// Adds `count` faces between existing vertices with at least one edge longer
/// than `min_len`, spliced at random positions. Returns the mesh and the
/// injected faces' final indices.
pub fn inject_long_edges(mesh: &TriMesh, count: usize, min_len: f64, rng: &mut impl Rng) -> Result<(TriMesh, Vec<usize>)> {
    let n = mesh.vertices.len();
    if n < 3 {
        return Err(Error::Precondition("need at least 3 vertices".into()));
    }
    let mut injected = Vec::new();
    let mut tries = 0;
    while injected.len() < count {
        tries += 1;
        if tries > 100_000 {
            return Err(Error::Degenerate(format!("no vertex pairs farther apart than {min_len}")));
        }
        let a = rng.gen_range(0..n) as u32;
        let b = rng.gen_range(0..n) as u32;
        let c = rng.gen_range(0..n) as u32;
        if a == b || b == c || a == c {
            continue;
        }
        let (pa, pb, pc) = (mesh.vertices[a as usize], mesh.vertices[b as usize], mesh.vertices[c as usize]);
        if dist(pa, pb) > min_len && dist(pb, pc) > min_len && dist(pc, pa) > min_len {
            injected.push([a, b, c]);
        }
    }
    let mut faces = mesh.faces.clone();
    let mut positions = Vec::with_capacity(count);
    for f in injected {
        let at = rng.gen_range(0..=faces.len());
        for p in positions.iter_mut() {
            if *p >= at {
                *p += 1;
            }
        }
        faces.insert(at, f);
        positions.push(at);
    }
    positions.sort_unstable();
    Ok((TriMesh { vertices: mesh.vertices.clone(), faces, frame: mesh.frame }, positions))
}
