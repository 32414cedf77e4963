//! Georeferencing, frame conversion, merging and closedness checks.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geodesy::{utm_to_wgs84, Hemisphere, UtmCoord};
use crate::geom::{dist, UnionFind};
use crate::ingest::OffsetRecord;
use crate::mesh::{edge_key, Frame, TriMesh};

/// Shifts a local-frame mesh by its offset and tags it with `target`.
pub fn georeference(mesh: &TriMesh, offset: &OffsetRecord, target: Frame) -> Result<TriMesh> {
    if mesh.frame != Frame::Local {
        return Err(Error::Frame(format!(
            "mesh is already georeferenced ({}); refusing to apply the offset twice",
            mesh.frame
        )));
    }
    if !target.is_utm() {
        return Err(Error::Frame(format!("georeference target must be a UTM frame, got {target}")));
    }
    let o = offset.as_vec();
    if !o.iter().all(|c| c.is_finite()) {
        return Err(Error::Parameter("offset is not finite".into()));
    }
    let mut out = mesh.translated(o);
    out.frame = target;
    Ok(out)
}

/// Per-vertex inverse projection to `(lon, lat, z)`.
pub fn export_wgs84(mesh: &TriMesh) -> Result<TriMesh> {
    let Frame::Utm { zone, north } = mesh.frame else {
        return Err(Error::Frame(format!("WGS84 export needs a UTM mesh, got {}", mesh.frame)));
    };
    let hemisphere = Hemisphere::from_north(north);
    let vertices = mesh
        .vertices
        .iter()
        .map(|v| {
            let g = utm_to_wgs84(UtmCoord::new(v[0], v[1], zone, hemisphere)?)?;
            Ok([g.lon, g.lat, v[2]])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TriMesh {
        vertices,
        faces: mesh.faces.clone(),
        frame: Frame::Wgs84,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MergeReport {
    pub vertices_welded: usize,
    pub faces_collapsed: usize,
}

/// Concatenates meshes sharing one frame, welding vertices closer than
/// `weld_tolerance` (0 disables welding). Welded vertices take the position
/// of the lowest-indexed member; faces collapsed by welding are dropped.
pub fn merge(meshes: &[TriMesh], weld_tolerance: f64) -> Result<(TriMesh, MergeReport)> {
    let Some(first) = meshes.first() else {
        return Ok((TriMesh::empty(Frame::Local), MergeReport::default()));
    };
    let odd: Vec<String> = meshes
        .iter()
        .enumerate()
        .filter(|(_, m)| m.frame != first.frame)
        .map(|(i, m)| format!("#{i} ({})", m.frame))
        .collect();
    if !odd.is_empty() {
        return Err(Error::Frame(format!(
            "meshes must share frame {}; mismatched: {}",
            first.frame,
            odd.join(", ")
        )));
    }
    if !(weld_tolerance >= 0.0 && weld_tolerance.is_finite()) {
        return Err(Error::Parameter(format!("weld tolerance {weld_tolerance} must be non-negative")));
    }
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for m in meshes {
        let base = vertices.len() as u32;
        vertices.extend_from_slice(&m.vertices);
        faces.extend(m.faces.iter().map(|f| f.map(|i| i + base)));
    }
    if weld_tolerance == 0.0 {
        return Ok((TriMesh { vertices, faces, frame: first.frame }, MergeReport::default()));
    }
    let mut uf = UnionFind::new(vertices.len());
    let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    let cell_of = |p: &[f64; 3]| p.map(|c| (c / weld_tolerance).floor() as i64);
    for (i, p) in vertices.iter().enumerate() {
        let c = cell_of(p);
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(list) = cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        for &j in list {
                            if dist(*p, vertices[j as usize]) <= weld_tolerance {
                                uf.union(i, j as usize);
                            }
                        }
                    }
                }
            }
        }
        cells.entry(c).or_default().push(i as u32);
    }
    let mut remap = vec![u32::MAX; vertices.len()];
    let mut out_v = Vec::new();
    for i in 0..vertices.len() {
        let r = uf.find(i);
        if r == i {
            remap[i] = out_v.len() as u32;
            out_v.push(vertices[i]);
        } else {
            remap[i] = remap[r];
        }
    }
    let mut out_f = Vec::with_capacity(faces.len());
    let mut collapsed = 0;
    for f in faces {
        let g = f.map(|i| remap[i as usize]);
        if g[0] == g[1] || g[1] == g[2] || g[0] == g[2] {
            collapsed += 1;
        } else {
            out_f.push(g);
        }
    }
    let report = MergeReport {
        vertices_welded: vertices.len() - out_v.len(),
        faces_collapsed: collapsed,
    };
    Ok((TriMesh { vertices: out_v, faces: out_f, frame: first.frame }, report))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WatertightReport {
    pub closed: bool,
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
    /// Edges used twice in the same direction.
    pub misoriented_edges: usize,
}

impl WatertightReport {
    pub fn require_closed(&self) -> Result<()> {
        if self.closed {
            Ok(())
        } else {
            Err(Error::NotWatertight {
                boundary_edges: self.boundary_edges,
                non_manifold_edges: self.non_manifold_edges + self.misoriented_edges,
            })
        }
    }
}

/// Closed iff every edge borders exactly two faces with opposite orientation.
pub fn watertight_check(mesh: &TriMesh) -> WatertightReport {
    // Per undirected edge: (uses, uses running from the lower to the higher index).
    let mut uses: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    for f in &mesh.faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            let e = uses.entry(edge_key(a, b)).or_insert((0, 0));
            e.0 += 1;
            if a < b {
                e.1 += 1;
            }
        }
    }
    let mut r = WatertightReport::default();
    for &(n, fwd) in uses.values() {
        match n {
            1 => r.boundary_edges += 1,
            2 if fwd != 1 => r.misoriented_edges += 1,
            2 => {}
            _ => r.non_manifold_edges += 1,
        }
    }
    r.closed = !mesh.faces.is_empty()
        && r.boundary_edges == 0
        && r.non_manifold_edges == 0
        && r.misoriented_edges == 0;
    r
}
