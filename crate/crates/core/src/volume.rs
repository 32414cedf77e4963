//! Enclosed volume, capacity below a stage plane, and stage-storage curves.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::{cross, dot, sub, KahanSum, Vec3};
use crate::meshops::watertight_check;
use crate::mesh::TriMesh;

fn require_single_closed(mesh: &TriMesh) -> Result<()> {
    watertight_check(mesh).require_closed()?;
    let (_, count) = mesh.component_labels();
    if count != 1 {
        return Err(Error::Precondition(format!(
            "volume needs a single closed shell, found {count} components"
        )));
    }
    Ok(())
}

/// Vertex mean, accumulated with compensation.
pub fn vertex_centroid(mesh: &TriMesh) -> Vec3 {
    let mut acc = [KahanSum::default(); 3];
    for v in &mesh.vertices {
        for a in 0..3 {
            acc[a].add(v[a]);
        }
    }
    let n = mesh.vertices.len().max(1) as f64;
    [acc[0].value() / n, acc[1].value() / n, acc[2].value() / n]
}

/// Signed volume of a closed mesh, positive for outward-facing normals.
/// Tetrahedra are taken about the vertex centroid.
pub fn enclosed_volume(mesh: &TriMesh) -> Result<f64> {
    watertight_check(mesh).require_closed()?;
    Ok(signed_volume_about(mesh, vertex_centroid(mesh)))
}

pub(crate) fn signed_volume_about(mesh: &TriMesh, c: Vec3) -> f64 {
    let mut acc = KahanSum::default();
    for f in &mesh.faces {
        let a = sub(mesh.vertices[f[0] as usize], c);
        let b = sub(mesh.vertices[f[1] as usize], c);
        let d = sub(mesh.vertices[f[2] as usize], c);
        acc.add(dot(a, cross(b, d)) / 6.0);
    }
    acc.value()
}

/// Volume inside a closed mesh and below `z = level`, from the divergence
/// theorem with `F = (0, 0, z - level)`: the cut plane contributes nothing,
/// so only the clipped faces are integrated.
pub fn volume_below_plane(mesh: &TriMesh, level: f64) -> Result<f64> {
    watertight_check(mesh).require_closed()?;
    let c = vertex_centroid(mesh);
    let l = level - c[2];
    let mut acc = KahanSum::default();
    let mut tri = |p: [Vec3; 3]| {
        let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let zbar = (p[0][2] + p[1][2] + p[2][2]) / 3.0;
        acc.add(0.5 * area2 * (zbar - l));
    };
    for f in &mesh.faces {
        let p: [Vec3; 3] = std::array::from_fn(|k| sub(mesh.vertices[f[k] as usize], c));
        let below: Vec<bool> = p.iter().map(|v| v[2] <= l).collect();
        let n = below.iter().filter(|b| **b).count();
        if n == 0 {
            continue;
        }
        if n == 3 {
            tri(p);
            continue;
        }
        // Walk the triangle, emitting kept vertices and edge-plane crossings.
        let mut poly: Vec<Vec3> = Vec::with_capacity(4);
        for k in 0..3 {
            let (a, b) = (p[k], p[(k + 1) % 3]);
            if below[k] {
                poly.push(a);
            }
            if below[k] != below[(k + 1) % 3] {
                let t = (l - a[2]) / (b[2] - a[2]);
                poly.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), l]);
            }
        }
        for k in 1..poly.len() - 1 {
            tri([poly[0], poly[k], poly[k + 1]]);
        }
    }
    Ok(acc.value())
}

/// Solid interior of a closed mesh sampled on vertical columns through the
/// centres of a lattice of `spacing`-sized cells aligned to multiples of the
/// spacing.
#[derive(Debug, Clone)]
pub struct SolidColumns {
    pub spacing: f64,
    /// Inside intervals `[z_enter, z_exit)` per occupied column.
    pub intervals: Vec<Vec<(f64, f64)>>,
}

/// Orientation of `p` against the directed segment `a -> b`, evaluated with the
/// endpoints in index order so that a shared edge gives bit-identical values
/// in both of its faces.
fn edge_fn(ia: u32, a: [f64; 2], ib: u32, b: [f64; 2], p: [f64; 2]) -> f64 {
    let (u, v, sign) = if ia < ib { (a, b, 1.0) } else { (b, a, -1.0) };
    sign * ((v[0] - u[0]) * (p[1] - u[1]) - (v[1] - u[1]) * (p[0] - u[0]))
}

/// Top-left rule for a counter-clockwise edge `a -> b`: ties on the edge
/// count only for left edges (pointing down) and horizontal top edges
/// (pointing in -x).
fn owns_tie(a: [f64; 2], b: [f64; 2]) -> bool {
    let dy = b[1] - a[1];
    dy < 0.0 || (dy == 0.0 && b[0] < a[0])
}

impl SolidColumns {
    pub fn build(mesh: &TriMesh, spacing: f64) -> Result<SolidColumns> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Parameter(format!("capacity spacing {spacing} must be positive")));
        }
        require_single_closed(mesh)?;
        let (lo, hi) = mesh.bounds().expect("closed mesh has vertices");
        let i0 = (lo[0] / spacing).floor() as i64 - 1;
        let j0 = (lo[1] / spacing).floor() as i64 - 1;
        let nx = ((hi[0] / spacing).floor() as i64 - i0 + 2) as usize;
        let ny = ((hi[1] / spacing).floor() as i64 - j0 + 2) as usize;
        if nx.checked_mul(ny).map_or(true, |n| n > 1 << 28) {
            return Err(Error::Resolution(format!("capacity spacing {spacing} m is too fine")));
        }
        let mut hits: Vec<Vec<(f64, i8)>> = vec![Vec::new(); nx * ny];
        for f in &mesh.faces {
            let v: [Vec3; 3] = std::array::from_fn(|k| mesh.vertices[f[k] as usize]);
            let xy: [[f64; 2]; 3] = std::array::from_fn(|k| [v[k][0], v[k][1]]);
            let area2 = (xy[1][0] - xy[0][0]) * (xy[2][1] - xy[0][1]) - (xy[2][0] - xy[0][0]) * (xy[1][1] - xy[0][1]);
            if area2 == 0.0 {
                continue;
            }
            // Counter-clockwise order in projection; upward faces exit the solid.
            let (order, dir) = if area2 > 0.0 { ([0, 1, 2], 1i8) } else { ([0, 2, 1], -1i8) };
            let ids = order.map(|k| f[k]);
            let q = order.map(|k| xy[k]);
            let z = order.map(|k| v[k][2]);
            let xlo = q[0][0].min(q[1][0]).min(q[2][0]);
            let xhi = q[0][0].max(q[1][0]).max(q[2][0]);
            let ylo = q[0][1].min(q[1][1]).min(q[2][1]);
            let yhi = q[0][1].max(q[1][1]).max(q[2][1]);
            let ci0 = ((xlo / spacing - 0.5).ceil() as i64).max(i0);
            let ci1 = (xhi / spacing - 0.5).floor() as i64;
            let cj0 = ((ylo / spacing - 0.5).ceil() as i64).max(j0);
            let cj1 = (yhi / spacing - 0.5).floor() as i64;
            for cj in cj0..=cj1 {
                for ci in ci0..=ci1 {
                    let p = [(ci as f64 + 0.5) * spacing, (cj as f64 + 0.5) * spacing];
                    let mut w = [0.0; 3];
                    let mut inside = true;
                    for k in 0..3 {
                        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                        let e = edge_fn(ids[a], q[a], ids[b], q[b], p);
                        if e < 0.0 || (e == 0.0 && !owns_tie(q[a], q[b])) {
                            inside = false;
                            break;
                        }
                        w[k] = e;
                    }
                    if !inside {
                        continue;
                    }
                    let s = w[0] + w[1] + w[2];
                    let zc = (w[0] * z[0] + w[1] * z[1] + w[2] * z[2]) / s;
                    let col = (ci - i0) as usize + nx * (cj - j0) as usize;
                    hits[col].push((zc, dir));
                }
            }
        }
        let mut intervals = Vec::with_capacity(hits.len());
        let mut odd = 0usize;
        for h in hits.iter_mut() {
            if h.is_empty() {
                continue;
            }
            h.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if h.len() % 2 == 1 {
                odd += 1;
                continue;
            }
            intervals.push(h.chunks(2).map(|c| (c[0].0, c[1].0)).collect());
        }
        if odd > 0 {
            return Err(Error::Internal(format!(
                "{odd} columns crossed the closed surface an odd number of times"
            )));
        }
        Ok(SolidColumns { spacing, intervals })
    }

    /// Number of cell centres `(k + 1/2) s` with `z0 <= zc < z1`.
    fn centres_in(&self, z0: f64, z1: f64) -> i64 {
        let s = self.spacing;
        let first = (z0 / s - 0.5).ceil() as i64;
        let last = (z1 / s - 0.5).ceil() as i64;
        (last - first).max(0)
    }

    pub fn footprint_area(&self) -> f64 {
        self.intervals.len() as f64 * self.spacing * self.spacing
    }

    pub fn cells_below(&self, level: f64) -> i64 {
        self.intervals
            .iter()
            .flat_map(|iv| iv.iter())
            .map(|&(a, b)| self.centres_in(a, b.min(level)))
            .sum()
    }

    pub fn capacity(&self, level: f64) -> Capacity {
        let s = self.spacing;
        Capacity {
            volume: self.cells_below(level) as f64 * s * s * s,
            error_bound: 0.5 * s * self.footprint_area(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity {
    pub volume: f64,
    /// Half a cell layer over the solid's footprint: the vertical quantisation
    /// error. Lateral error from the column lattice is not included.
    pub error_bound: f64,
}

/// Volume of the solid below `z = level` by counting cell centres.
pub fn capacity_at_level(mesh: &TriMesh, level: f64, spacing: f64) -> Result<Capacity> {
    Ok(SolidColumns::build(mesh, spacing)?.capacity(level))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageStorageCurve {
    /// Levels relative to `datum`, in meters.
    pub levels: Vec<f64>,
    pub capacities: Vec<f64>,
    pub error_bound: f64,
    pub datum: f64,
    pub spacing: f64,
}

/// Capacity at each `datum + level`. Levels must be strictly increasing.
pub fn stage_storage_curve(mesh: &TriMesh, levels: &[f64], datum: f64, spacing: f64) -> Result<StageStorageCurve> {
    if levels.is_empty() {
        return Err(Error::Parameter("no levels requested".into()));
    }
    if levels.iter().any(|l| !l.is_finite()) || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("levels must be finite and strictly increasing".into()));
    }
    let cols = SolidColumns::build(mesh, spacing)?;
    let capacities: Vec<f64> = levels.iter().map(|l| cols.capacity(datum + l).volume).collect();
    if capacities.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Internal("capacity decreased with rising level".into()));
    }
    Ok(StageStorageCurve {
        levels: levels.to_vec(),
        capacities,
        error_bound: cols.capacity(f64::INFINITY).error_bound,
        datum,
        spacing,
    })
}

impl StageStorageCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level_m,capacity_m3\n");
        for (l, c) in self.levels.iter().zip(&self.capacities) {
            let _ = writeln!(s, "{l},{c}");
        }
        s
    }

    /// Whitespace-separated columns with `#` metadata lines, for plotting tools.
    pub fn to_plot_data(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# stage-storage curve");
        let _ = writeln!(s, "# capacity: water volume inside the closed lake solid below the stage plane");
        let _ = writeln!(s, "# datum_z_m {}", self.datum);
        let _ = writeln!(s, "# cell_spacing_m {}", self.spacing);
        let _ = writeln!(s, "# error_bound_m3 {}", self.error_bound);
        let _ = writeln!(s, "# level_m capacity_m3");
        for (l, c) in self.levels.iter().zip(&self.capacities) {
            let _ = writeln!(s, "{l} {c}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Frame;

    pub(crate) fn unit_cube() -> TriMesh {
        let v = (0..8)
            .map(|c| [(c & 1) as f64, ((c >> 1) & 1) as f64, (c >> 2) as f64])
            .collect();
        let quads = [[0, 4, 6, 2], [1, 3, 7, 5], [0, 1, 5, 4], [2, 6, 7, 3], [0, 2, 3, 1], [4, 5, 7, 6]];
        let f = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
        TriMesh::new(v, f, Frame::Local).unwrap()
    }

    #[test]
    fn cube_volume_and_orientation() {
        assert_eq!(enclosed_volume(&unit_cube()).unwrap(), 1.0);
        assert_eq!(enclosed_volume(&unit_cube().flipped()).unwrap(), -1.0);
        let mut open = unit_cube();
        open.faces.pop();
        assert!(matches!(enclosed_volume(&open), Err(Error::NotWatertight { boundary_edges: 3, .. })));
    }

    #[test]
    fn translation_invariance() {
        let m = unit_cube();
        let far = m.translated([1e4, 1e4, 1e2]);
        let (a, b) = (enclosed_volume(&m).unwrap(), enclosed_volume(&far).unwrap());
        assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn plane_cut_volume() {
        let m = unit_cube();
        for (l, want) in [(-1.0, 0.0), (0.25, 0.25), (0.5, 0.5), (1.0, 1.0), (3.0, 1.0)] {
            assert!((volume_below_plane(&m, l).unwrap() - want).abs() < 1e-15, "level {l}");
        }
    }

    #[test]
    fn cube_capacity() {
        let m = unit_cube();
        for s in [0.1, 0.125, 0.25] {
            let c = capacity_at_level(&m, 0.5, s).unwrap();
            assert!((c.volume - 0.5).abs() <= s * 1.0 + 1e-12, "s={s}: {c:?}");
            assert_eq!(capacity_at_level(&m, 0.0, s).unwrap().volume, 0.0);
            assert_eq!(capacity_at_level(&m, -3.0, s).unwrap().volume, 0.0);
            let full = capacity_at_level(&m, 1.0, s).unwrap();
            assert!((full.volume - 1.0).abs() <= full.error_bound + 1e-12);
            assert_eq!(capacity_at_level(&m, 5.0, s).unwrap().volume, full.volume);
        }
        // Vertices on column centres exercise the tie rule.
        let c = capacity_at_level(&m.translated([0.125, 0.125, 0.0]), 2.0, 0.25).unwrap();
        assert!((c.volume - 1.0).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn curve_rules() {
        let m = unit_cube();
        assert!(stage_storage_curve(&m, &[0.5, 0.2], 0.0, 0.1).is_err());
        assert!(stage_storage_curve(&m, &[], 0.0, 0.1).is_err());
        let c = stage_storage_curve(&m, &[0.5], 0.0, 0.1).unwrap();
        assert_eq!(c.capacities.len(), 1);
        let c = stage_storage_curve(&m, &[-0.5, 0.0, 0.5, 1.0], 0.5, 0.1).unwrap();
        assert!(c.to_csv().starts_with("level_m,capacity_m3\n-0.5,"));
        assert!(c.capacities.windows(2).all(|w| w[1] >= w[0]));
    }
}
