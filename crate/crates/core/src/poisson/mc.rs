//! Marching cubes by tracing iso-segments over cube faces.
//!
//! Each face of a cube contributes 0, 1 or 2 directed segments; a corner
//! counts as high when its value is `>= iso`. Segments run with the high region
//! on their right as seen from outside the cube, so the closed loops they form
//! triangulate with normals pointing toward the low side. Faces with two
//! diagonal high corners are resolved by the asymptotic decider: the high
//! corners are joined when the bilinear saddle value is `>= iso`. The decision
//! only reads the face's own four values in a canonical order, so adjacent
//! cubes always agree and the surface has no cracks.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geom::Vec3;
use crate::mesh::{Frame, TriMesh};

/// Corners of each face, counter-clockwise seen from outside. Corner `c` sits
/// at offset `(c & 1, (c >> 1) & 1, c >> 2)`.
const FACES: [[usize; 4]; 6] = [
    [0, 4, 6, 2],
    [1, 3, 7, 5],
    [0, 1, 5, 4],
    [2, 6, 7, 3],
    [0, 2, 3, 1],
    [4, 5, 7, 6],
];

/// Local edge index of the cube edge joining two adjacent corners: edges are
/// numbered `4 * axis + (low corner with the axis bit removed)`.
fn edge_between(a: usize, b: usize) -> usize {
    let lo = a.min(b);
    let axis = (a ^ b).trailing_zeros() as usize;
    let rest = match axis {
        0 => lo >> 1,
        1 => (lo & 1) | ((lo >> 2) << 1),
        _ => lo & 3,
    };
    4 * axis + rest
}

/// Low corner of a local edge.
fn edge_corner(e: usize) -> (usize, usize) {
    let axis = e / 4;
    let r = e % 4;
    let c = match axis {
        0 => r << 1,
        1 => (r & 1) | ((r >> 1) << 2),
        _ => r,
    };
    (c, axis)
}

/// Bitmask over the six faces `(2 * axis + side)` containing a local edge.
fn edge_faces(e: usize) -> u8 {
    let (c, axis) = edge_corner(e);
    let mut m = 0u8;
    for o in 0..3 {
        if o != axis {
            m |= 1 << (2 * o + ((c >> o) & 1));
        }
    }
    m
}

struct Builder<'a> {
    field: &'a ScalarField,
    iso: f64,
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    by_edge: HashMap<usize, u32>,
}

impl Builder<'_> {
    fn vertex(&mut self, base: [usize; 3], e: usize) -> u32 {
        let (c, axis) = edge_corner(e);
        let l = &self.field.layout;
        let a = [base[0] + (c & 1), base[1] + ((c >> 1) & 1), base[2] + (c >> 2)];
        let ia = l.index(a[0], a[1], a[2]);
        let key = 3 * ia + axis;
        if let Some(&v) = self.by_edge.get(&key) {
            return v;
        }
        let mut b = a;
        b[axis] += 1;
        let fa = self.field.values[ia];
        let fb = self.field.get(b[0], b[1], b[2]);
        let t = (self.iso - fa) / (fb - fa);
        let mut p = l.node(a[0], a[1], a[2]);
        p[axis] += t * l.spacing;
        let v = self.vertices.len() as u32;
        self.vertices.push(p);
        self.by_edge.insert(key, v);
        v
    }

    fn cube(&mut self, base: [usize; 3], f: &[f64; 8]) {
        let high: [bool; 8] = std::array::from_fn(|c| f[c] >= self.iso);
        if high.iter().all(|&h| h) || high.iter().all(|&h| !h) {
            return;
        }
        let mut next = [usize::MAX; 12];
        for q in FACES.iter() {
            let mut entries = [0usize; 2];
            let mut exits = [0usize; 2];
            let (mut ne, mut nx) = (0, 0);
            let mut kinds = [0i8; 4];
            for k in 0..4 {
                let (a, b) = (q[k], q[(k + 1) % 4]);
                if !high[a] && high[b] {
                    kinds[k] = 1;
                    entries[ne] = k;
                    ne += 1;
                } else if high[a] && !high[b] {
                    kinds[k] = -1;
                    exits[nx] = k;
                    nx += 1;
                }
            }
            let edge = |k: usize| edge_between(q[k], q[(k + 1) % 4]);
            match ne {
                0 => {}
                1 => next[edge(entries[0])] = edge(exits[0]),
                _ => {
                    let mut sorted = *q;
                    sorted.sort_unstable();
                    let (fa, fb, fc, fd) = (f[sorted[0]], f[sorted[1]], f[sorted[2]], f[sorted[3]]);
                    let saddle = (fa * fd - fb * fc) / ((fa + fd) - (fb + fc));
                    let high_joined = saddle >= self.iso;
                    for &k in &entries[..ne] {
                        let x = if high_joined { (k + 3) % 4 } else { (k + 1) % 4 };
                        debug_assert_eq!(kinds[x], -1);
                        next[edge(k)] = edge(x);
                    }
                }
            }
        }
        let mut seen = [false; 12];
        for start in 0..12 {
            if next[start] == usize::MAX || seen[start] {
                continue;
            }
            let mut lp = Vec::with_capacity(12);
            let mut e = start;
            while !seen[e] {
                seen[e] = true;
                lp.push(e);
                e = next[e];
                debug_assert!(e != usize::MAX, "open iso-loop");
            }
            self.emit_loop(base, &lp);
        }
    }

    fn emit_loop(&mut self, base: [usize; 3], lp: &[usize]) {
        let n = lp.len();
        let ids: Vec<u32> = lp.iter().map(|&e| self.vertex(base, e)).collect();
        if n == 3 {
            self.faces.push([ids[0], ids[1], ids[2]]);
            return;
        }
        let masks: Vec<u8> = lp.iter().map(|&e| edge_faces(e)).collect();
        let fan_start = (0..n).find(|&s| (2..n - 1).all(|m| masks[s] & masks[(s + m) % n] == 0));
        match fan_start {
            Some(s) => {
                for m in 1..n - 1 {
                    self.faces.push([ids[s], ids[(s + m) % n], ids[(s + m + 1) % n]]);
                }
            }
            None => {
                let mut c = [0.0; 3];
                for &v in &ids {
                    for a in 0..3 {
                        c[a] += self.vertices[v as usize][a];
                    }
                }
                let c = c.map(|x| x / n as f64);
                let cv = self.vertices.len() as u32;
                self.vertices.push(c);
                for m in 0..n {
                    self.faces.push([cv, ids[m], ids[(m + 1) % n]]);
                }
            }
        }
    }
}

/// Extracts the `iso` level set of a 3D field. Normals point toward values
/// below `iso`. An isovalue outside the field's range yields an empty mesh.
pub fn marching_cubes(field: &ScalarField, iso: f64) -> Result<TriMesh> {
    let l = field.layout;
    let [nx, ny, nz] = l.dims;
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(Error::Parameter(format!(
            "marching cubes needs at least 2 nodes per axis, got {nx}x{ny}x{nz}"
        )));
    }
    if field.values.len() != l.len() || field.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("field values must be finite".into()));
    }
    if !iso.is_finite() {
        return Err(Error::Parameter(format!("isovalue {iso} is not finite")));
    }
    let (lo, hi) = field.range().expect("non-empty field");
    if iso > hi || iso <= lo {
        log::warn!("isovalue {iso} outside field range [{lo}, {hi}]; surface is empty");
        return Ok(TriMesh::empty(Frame::Local));
    }
    let mut b = Builder {
        field,
        iso,
        vertices: Vec::new(),
        faces: Vec::new(),
        by_edge: HashMap::new(),
    };
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let f: [f64; 8] = std::array::from_fn(|c| {
                    field.get(i + (c & 1), j + ((c >> 1) & 1), k + (c >> 2))
                });
                b.cube([i, j, k], &f);
            }
        }
    }
    Ok(TriMesh {
        vertices: b.vertices,
        faces: b.faces,
        frame: Frame::Local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridLayout;
    use crate::geom::{cross, dot, sub};
    use std::collections::HashMap;

    #[test]
    fn edge_tables_are_consistent() {
        for e in 0..12 {
            let (c, axis) = edge_corner(e);
            assert_eq!(edge_between(c, c | (1 << axis)), e);
            assert_eq!(edge_faces(e).count_ones(), 2);
        }
        for (fi, q) in FACES.iter().enumerate() {
            for k in 0..4 {
                let e = edge_between(q[k], q[(k + 1) % 4]);
                assert!(edge_faces(e) & (1 << fi) != 0, "face {fi} edge {e}");
            }
        }
    }

    fn edge_use(m: &TriMesh) -> HashMap<(u32, u32), i32> {
        let mut uses = HashMap::new();
        for f in &m.faces {
            for k in 0..3 {
                *uses.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        uses
    }

    #[test]
    fn plane_from_linear_field() {
        let l = GridLayout::new([0.0; 3], 1.0, [4, 5, 3]).unwrap();
        let f = ScalarField::from_fn(l, |p| p[2] - 0.5);
        let m = marching_cubes(&f, 0.0).unwrap();
        assert!(m.vertices.iter().all(|v| (v[2] - 0.5).abs() < 1e-15));
        assert!((m.surface_area() - 12.0).abs() < 1e-9);
        for fi in 0..m.faces.len() {
            let [a, b, c] = m.triangle(fi);
            assert!(cross(sub(b, a), sub(c, a))[2] < 0.0, "normal points to low side");
        }
    }

    #[test]
    fn empty_outside_range() {
        let l = GridLayout::new([0.0; 3], 1.0, [3, 3, 3]).unwrap();
        let f = ScalarField::from_fn(l, |p| p[0]);
        assert!(marching_cubes(&f, 5.0).unwrap().is_empty());
        assert!(marching_cubes(&f, -1.0).unwrap().is_empty());
    }

    #[test]
    fn every_cube_configuration_is_closed_and_oriented() {
        // All 256 sign patterns with random magnitudes, embedded in a 4³ grid
        // whose border is low so each surface is closed.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let l = GridLayout::new([0.0; 3], 1.0, [4, 4, 4]).unwrap();
        for case in 0..256usize {
            for _ in 0..4 {
                let mut f = ScalarField::filled(l, -1.0);
                for c in 0..8 {
                    let v = if case >> c & 1 == 1 { rng.gen_range(0.01..1.0) } else { -rng.gen_range(0.01..1.0) };
                    let idx = l.index(1 + (c & 1), 1 + ((c >> 1) & 1), 1 + (c >> 2));
                    f.values[idx] = v;
                }
                let m = marching_cubes(&f, 0.0).unwrap();
                let uses = edge_use(&m);
                for (&(a, b), &n) in &uses {
                    assert_eq!(n, 1, "case {case}: directed edge used {n} times");
                    assert_eq!(uses.get(&(b, a)), Some(&1), "case {case}: edge without twin");
                }
                // High corners are enclosed; normals toward the low outside give
                // positive signed volume.
                let mut vol = 0.0;
                for fi in 0..m.faces.len() {
                    let [a, b, c] = m.triangle(fi);
                    vol += dot(a, cross(b, c)) / 6.0;
                }
                if case != 0 {
                    assert!(vol > 0.0, "case {case}: volume {vol}");
                }
            }
        }
    }
}
