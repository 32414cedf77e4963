//! Face filters that remove reconstruction and photogrammetry artifacts.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geom::dist;
use crate::mesh::{edge_key, TriMesh};
use crate::pointcloud::Polygon2D;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepairReport {
    pub faces_removed_long_edge: usize,
    pub faces_removed_footprint: usize,
    pub faces_clipped: usize,
    pub vertices_clipped: usize,
    pub components_removed: usize,
}

impl RepairReport {
    pub fn absorb(&mut self, o: RepairReport) {
        self.faces_removed_long_edge += o.faces_removed_long_edge;
        self.faces_removed_footprint += o.faces_removed_footprint;
        self.faces_clipped += o.faces_clipped;
        self.vertices_clipped += o.vertices_clipped;
        self.components_removed += o.components_removed;
    }
}

/// Median length over the mesh's distinct undirected edges.
pub fn median_edge_length(mesh: &TriMesh) -> Option<f64> {
    let mut seen = HashSet::new();
    let mut lens = Vec::new();
    for f in &mesh.faces {
        for k in 0..3 {
            let (a, b) = edge_key(f[k], f[(k + 1) % 3]);
            if seen.insert((a, b)) {
                lens.push(dist(mesh.vertices[a as usize], mesh.vertices[b as usize]));
            }
        }
    }
    if lens.is_empty() {
        return None;
    }
    lens.sort_by(f64::total_cmp);
    let n = lens.len();
    Some(if n % 2 == 1 {
        lens[n / 2]
    } else {
        0.5 * (lens[n / 2 - 1] + lens[n / 2])
    })
}

/// Drops every face with an edge longer than `alpha` times the median edge.
pub fn remove_long_edge_faces(mesh: &TriMesh, alpha: f64) -> Result<(TriMesh, RepairReport)> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha {alpha} must exceed 1")));
    }
    let Some(median) = median_edge_length(mesh) else {
        return Ok((mesh.clone(), RepairReport::default()));
    };
    let limit = alpha * median;
    let keep: Vec<bool> = (0..mesh.faces.len())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            dist(a, b) <= limit && dist(b, c) <= limit && dist(c, a) <= limit
        })
        .collect();
    let removed = keep.iter().filter(|k| !**k).count();
    Ok((
        mesh.retain_faces(&keep),
        RepairReport {
            faces_removed_long_edge: removed,
            ..Default::default()
        },
    ))
}

/// Keeps the edge-connected component with the largest area. Ties go to the
/// component holding the lowest vertex index.
pub fn largest_component(mesh: &TriMesh) -> (TriMesh, RepairReport) {
    if mesh.faces.is_empty() {
        return (mesh.clone(), RepairReport::default());
    }
    let (labels, count) = mesh.component_labels();
    let mut area = vec![0.0; count];
    let mut low = vec![u32::MAX; count];
    for (f, &l) in labels.iter().enumerate() {
        area[l] += mesh.face_area(f);
        low[l] = low[l].min(*mesh.faces[f].iter().min().expect("3 indices"));
    }
    let best = (0..count)
        .max_by(|&a, &b| area[a].total_cmp(&area[b]).then(low[b].cmp(&low[a])))
        .expect("non-empty");
    let keep: Vec<bool> = labels.iter().map(|&l| l == best).collect();
    (
        mesh.retain_faces(&keep),
        RepairReport {
            components_removed: count - 1,
            ..Default::default()
        },
    )
}

/// Removes faces lying entirely below `z_cut`; straddling faces stay whole.
pub fn clip_below_plane(mesh: &TriMesh, z_cut: f64) -> (TriMesh, RepairReport) {
    let keep: Vec<bool> = mesh
        .faces
        .iter()
        .map(|f| f.iter().any(|&i| mesh.vertices[i as usize][2] >= z_cut))
        .collect();
    let out = mesh.retain_faces(&keep);
    let report = RepairReport {
        faces_clipped: mesh.faces.len() - out.faces.len(),
        vertices_clipped: mesh.vertices.len() - out.vertices.len(),
        ..Default::default()
    };
    (out, report)
}

/// Removes faces with any vertex farther than `margin` outside the polygon in
/// (e, n). Trims the sheet that Poisson extrapolates past the surveyed area.
pub fn trim_to_footprint(mesh: &TriMesh, footprint: &Polygon2D, margin: f64) -> (TriMesh, RepairReport) {
    let inside: Vec<bool> = mesh
        .vertices
        .iter()
        .map(|v| footprint.signed_distance([v[0], v[1]]) >= -margin)
        .collect();
    let keep: Vec<bool> = mesh
        .faces
        .iter()
        .map(|f| f.iter().all(|&i| inside[i as usize]))
        .collect();
    let out = mesh.retain_faces(&keep);
    let report = RepairReport {
        faces_removed_footprint: mesh.faces.len() - out.faces.len(),
        ..Default::default()
    };
    (out, report)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RepairOptions {
    pub alpha: Option<f64>,
    pub clip_below: Option<f64>,
    pub footprint: Option<(Polygon2D, f64)>,
    pub largest_component: bool,
}

/// Applies the enabled filters in a fixed order: long edges, plane clip,
/// footprint trim, largest component.
pub fn repair(mesh: &TriMesh, opts: &RepairOptions) -> Result<(TriMesh, RepairReport)> {
    let mut report = RepairReport::default();
    let mut m = mesh.clone();
    if let Some(alpha) = opts.alpha {
        let (out, r) = remove_long_edge_faces(&m, alpha)?;
        m = out;
        report.absorb(r);
    }
    if let Some(z) = opts.clip_below {
        let (out, r) = clip_below_plane(&m, z);
        m = out;
        report.absorb(r);
    }
    if let Some((poly, margin)) = &opts.footprint {
        let (out, r) = trim_to_footprint(&m, poly, *margin);
        m = out;
        report.absorb(r);
    }
    if opts.largest_component {
        let (out, r) = largest_component(&m);
        m = out;
        report.absorb(r);
    }
    Ok((m, report))
}
