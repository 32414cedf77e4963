//! Occupancy grids: conservative voxelization, morphological closing, basin
//! filling and surface wrapping.

use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{GridLayout, ScalarField};
use crate::geom::{cross, dot, sub, Vec3};
use crate::mesh::{Frame, TriMesh};
use crate::poisson::marching_cubes;

const MAX_VOXELS: usize = 1 << 28;

/// Voxel `(i, j, k)` covers `origin + spacing * [i, i+1) × [j, j+1) × [k, k+1)`.
/// Origins produced here are integer multiples of the spacing, so grids built
/// from different meshes at one spacing share a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub origin: Vec3,
    pub spacing: f64,
    pub dims: [usize; 3],
    pub occupied: Vec<bool>,
    pub frame: Frame,
}

impl VoxelGrid {
    pub fn empty(origin: Vec3, spacing: f64, dims: [usize; 3], frame: Frame) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Parameter(format!("voxel spacing {spacing} must be positive")));
        }
        let n = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        match n {
            Some(n) if n <= MAX_VOXELS => Ok(VoxelGrid {
                origin,
                spacing,
                dims,
                occupied: vec![false; n],
                frame,
            }),
            _ => Err(Error::Resolution(format!(
                "{}x{}x{} voxels at spacing {spacing} m exceed the voxel budget",
                dims[0], dims[1], dims[2]
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.occupied[self.index(i, j, k)]
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let s = self.spacing;
        [
            self.origin[0] + (i as f64 + 0.5) * s,
            self.origin[1] + (j as f64 + 0.5) * s,
            self.origin[2] + (k as f64 + 0.5) * s,
        ]
    }

    pub fn count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.spacing.powi(3)
    }

    pub fn touches_boundary(&self) -> bool {
        let [nx, ny, nz] = self.dims;
        (0..nz).any(|k| {
            (0..ny).any(|j| {
                (0..nx).any(|i| {
                    let edge = i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == ny || k + 1 == nz;
                    edge && self.get(i, j, k)
                })
            })
        })
    }

    /// Debug dump: text header, then occupancy packed 8 voxels per byte, x
    /// fastest, least significant bit first.
    pub fn write_dump(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "lakemesh-voxels 1")?;
        writeln!(out, "dims {} {} {}", self.dims[0], self.dims[1], self.dims[2])?;
        writeln!(out, "origin {} {} {}", self.origin[0], self.origin[1], self.origin[2])?;
        writeln!(out, "spacing {}", self.spacing)?;
        writeln!(out, "frame {}", self.frame)?;
        writeln!(out, "encoding bits_lsb")?;
        writeln!(out, "end_header")?;
        let bytes: Vec<u8> = self
            .occupied
            .chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |b, (i, &o)| b | ((o as u8) << i)))
            .collect();
        out.write_all(&bytes)?;
        Ok(())
    }

    /// 6-connected components of the occupied voxels: a label per voxel
    /// (`usize::MAX` when empty, else numbered in scan order) and the count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.len()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.len() {
            if !self.occupied[start] || label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            queue.push_back(start);
            while let Some(a) = queue.pop_front() {
                for b in self.neighbours(a) {
                    if self.occupied[b] && label[b] == usize::MAX {
                        label[b] = count;
                        queue.push_back(b);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    fn neighbours(&self, a: usize) -> impl Iterator<Item = usize> {
        let [nx, ny, nz] = self.dims;
        let i = a % nx;
        let j = (a / nx) % ny;
        let k = a / (nx * ny);
        let plane = nx * ny;
        [
            (i > 0).then(|| a - 1),
            (i + 1 < nx).then(|| a + 1),
            (j > 0).then(|| a - nx),
            (j + 1 < ny).then(|| a + nx),
            (k > 0).then(|| a - plane),
            (k + 1 < nz).then(|| a + plane),
        ]
        .into_iter()
        .flatten()
    }
}

fn axis_test(v: &[Vec3; 3], axis: Vec3, h: f64) -> bool {
    let p: [f64; 3] = std::array::from_fn(|i| dot(v[i], axis));
    let r = h * (axis[0].abs() + axis[1].abs() + axis[2].abs());
    let lo = p[0].min(p[1]).min(p[2]);
    let hi = p[0].max(p[1]).max(p[2]);
    !(lo > r || hi < -r)
}

/// Separating-axis overlap of a triangle (relative to the box centre) with a
/// cube of half-width `h`. Touching counts as overlap.
pub fn triangle_box_overlap(v: [Vec3; 3], h: f64) -> bool {
    for a in 0..3 {
        let lo = v[0][a].min(v[1][a]).min(v[2][a]);
        let hi = v[0][a].max(v[1][a]).max(v[2][a]);
        if lo > h || hi < -h {
            return false;
        }
    }
    let e = [sub(v[1], v[0]), sub(v[2], v[1]), sub(v[0], v[2])];
    let n = cross(e[0], e[1]);
    if !axis_test(&v, n, h) {
        return false;
    }
    for ei in &e {
        for a in 0..3 {
            let mut unit = [0.0; 3];
            unit[a] = 1.0;
            let axis = cross(unit, *ei);
            if axis != [0.0; 3] && !axis_test(&v, axis, h) {
                return false;
            }
        }
    }
    true
}

/// Marks every voxel a triangle touches. The grid covers the mesh bounds plus
/// one empty voxel on each side.
pub fn voxelize(mesh: &TriMesh, spacing: f64) -> Result<VoxelGrid> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Parameter(format!("voxel spacing {spacing} must be positive")));
    }
    let (lo, hi) = mesh
        .bounds()
        .ok_or_else(|| Error::Precondition("cannot voxelize an empty mesh".into()))?;
    let mut base = [0i64; 3];
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let l = (lo[a] / spacing).floor() - 1.0;
        let u = (hi[a] / spacing).floor() + 1.0;
        if !((u - l) < 1e9) {
            return Err(Error::Resolution(format!("voxel spacing {spacing} is too fine for the mesh")));
        }
        base[a] = l as i64;
        dims[a] = (u - l) as usize + 1;
    }
    let origin = base.map(|b| b as f64 * spacing);
    let mut grid = VoxelGrid::empty(origin, spacing, dims, mesh.frame)?;
    let half = 0.5 * spacing * (1.0 + 1e-9);
    let hits: Vec<Vec<usize>> = (0..mesh.faces.len())
        .into_par_iter()
        .map(|f| {
            let t = mesh.triangle(f);
            let mut r = [[0usize; 2]; 3];
            for a in 0..3 {
                let tl = t[0][a].min(t[1][a]).min(t[2][a]);
                let th = t[0][a].max(t[1][a]).max(t[2][a]);
                let i0 = ((tl - half) / spacing).floor() as i64 - base[a];
                let i1 = ((th + half) / spacing).floor() as i64 - base[a];
                r[a] = [i0.max(0) as usize, (i1.max(0) as usize).min(dims[a] - 1)];
            }
            let mut out = Vec::new();
            for k in r[2][0]..=r[2][1] {
                for j in r[1][0]..=r[1][1] {
                    for i in r[0][0]..=r[0][1] {
                        let c = grid.center(i, j, k);
                        let rel = [sub(t[0], c), sub(t[1], c), sub(t[2], c)];
                        if triangle_box_overlap(rel, half) {
                            out.push(grid.index(i, j, k));
                        }
                    }
                }
            }
            out
        })
        .collect();
    for list in hits {
        for i in list {
            grid.occupied[i] = true;
        }
    }
    Ok(grid)
}

fn dilate(g: &VoxelGrid) -> Vec<bool> {
    let mut out = g.occupied.clone();
    for (a, &o) in g.occupied.iter().enumerate() {
        if o {
            for b in g.neighbours(a) {
                out[b] = true;
            }
        }
    }
    out
}

fn erode(g: &VoxelGrid) -> Vec<bool> {
    let [nx, ny, nz] = g.dims;
    let mut out = vec![false; g.len()];
    for (a, slot) in out.iter_mut().enumerate() {
        if !g.occupied[a] {
            continue;
        }
        let i = a % nx;
        let j = (a / nx) % ny;
        let k = a / (nx * ny);
        let interior = i > 0 && j > 0 && k > 0 && i + 1 < nx && j + 1 < ny && k + 1 < nz;
        *slot = interior && g.neighbours(a).all(|b| g.occupied[b]);
    }
    out
}

/// Morphological closing with a 6-connected structuring element of `radius`
/// steps, evaluated as if the grid were surrounded by empty space. The result
/// always contains the input.
pub fn close_gaps(grid: &VoxelGrid, radius: usize) -> Result<VoxelGrid> {
    if radius == 0 {
        return Err(Error::Parameter("closing radius must be at least 1".into()));
    }
    let p = radius;
    let s = grid.spacing;
    let pdims = grid.dims.map(|d| d + 2 * p);
    let porigin = grid.origin.map(|o| o - p as f64 * s);
    let mut work = VoxelGrid::empty(porigin, s, pdims, grid.frame)?;
    let [nx, ny, nz] = grid.dims;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if grid.get(i, j, k) {
                    let a = work.index(i + p, j + p, k + p);
                    work.occupied[a] = true;
                }
            }
        }
    }
    for _ in 0..radius {
        work.occupied = dilate(&work);
    }
    for _ in 0..radius {
        work.occupied = erode(&work);
    }
    let mut out = grid.clone();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if work.get(i + p, j + p, k + p) {
                    let a = out.index(i, j, k);
                    out.occupied[a] = true;
                }
            }
        }
    }
    Ok(out)
}

/// Highest z of the mesh above each voxel column centre, NaN where the
/// column misses the mesh.
pub fn column_tops(grid: &VoxelGrid, mesh: &TriMesh) -> Vec<f64> {
    let [nx, ny, _] = grid.dims;
    let s = grid.spacing;
    let mut top = vec![f64::NAN; nx * ny];
    for f in 0..mesh.faces.len() {
        let t = mesh.triangle(f);
        let d = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]);
        if d == 0.0 {
            continue;
        }
        let lo = |a: usize| t[0][a].min(t[1][a]).min(t[2][a]);
        let hi = |a: usize| t[0][a].max(t[1][a]).max(t[2][a]);
        let range = |a: usize, n: usize| {
            let i0 = ((lo(a) - grid.origin[a]) / s - 0.5).ceil().max(0.0) as usize;
            let i1 = ((hi(a) - grid.origin[a]) / s - 0.5).floor();
            (i0, if i1 < 0.0 { None } else { Some((i1 as usize).min(n - 1)) })
        };
        let ((i0, Some(i1)), (j0, Some(j1))) = (range(0, nx), range(1, ny)) else {
            continue;
        };
        for j in j0..=j1 {
            for i in i0..=i1 {
                let c = grid.center(i, j, 0);
                let w1 = ((c[0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (c[1] - t[0][1])) / d;
                let w2 = ((t[1][0] - t[0][0]) * (c[1] - t[0][1]) - (c[0] - t[0][0]) * (t[1][1] - t[0][1])) / d;
                let w0 = 1.0 - w1 - w2;
                let eps = -1e-12;
                if w0 >= eps && w1 >= eps && w2 >= eps {
                    let z = w0 * t[0][2] + w1 * t[1][2] + w2 * t[2][2];
                    let slot = &mut top[i + nx * j];
                    if slot.is_nan() || z > *slot {
                        *slot = z;
                    }
                }
            }
        }
    }
    top
}

/// Adds every voxel whose centre lies below the topmost mesh hit of its
/// column, turning a terrain surface into solid ground.
pub fn solidify_columns(grid: &VoxelGrid, mesh: &TriMesh) -> VoxelGrid {
    let [nx, ny, nz] = grid.dims;
    let tops = column_tops(grid, mesh);
    let mut out = grid.clone();
    for j in 0..ny {
        for i in 0..nx {
            let t = tops[i + nx * j];
            if t.is_nan() {
                continue;
            }
            for k in 0..nz {
                if grid.center(i, j, k)[2] < t {
                    let a = out.index(i, j, k);
                    out.occupied[a] = true;
                }
            }
        }
    }
    out
}

fn largest_component_of(g: &VoxelGrid) -> Vec<bool> {
    let mut label = vec![usize::MAX; g.len()];
    let mut best: (usize, usize) = (0, usize::MAX);
    let mut queue = VecDeque::new();
    for start in 0..g.len() {
        if !g.occupied[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = start;
        queue.push_back(start);
        let mut size = 0;
        while let Some(a) = queue.pop_front() {
            size += 1;
            for b in g.neighbours(a) {
                if g.occupied[b] && label[b] == usize::MAX {
                    label[b] = start;
                    queue.push_back(b);
                }
            }
        }
        if size > best.0 {
            best = (size, start);
        }
    }
    label.iter().map(|&l| l == best.1).collect()
}

/// Empty voxels that cannot reach the grid boundary through empty voxels.
fn fill_cavities(g: &VoxelGrid) -> Vec<bool> {
    let [nx, ny, nz] = g.dims;
    let mut outside = vec![false; g.len()];
    let mut queue = VecDeque::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let edge = i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == ny || k + 1 == nz;
                let a = g.index(i, j, k);
                if edge && !g.occupied[a] {
                    outside[a] = true;
                    queue.push_back(a);
                }
            }
        }
    }
    while let Some(a) = queue.pop_front() {
        for b in g.neighbours(a) {
            if !g.occupied[b] && !outside[b] {
                outside[b] = true;
                queue.push_back(b);
            }
        }
    }
    outside.iter().map(|&o| !o).collect()
}

/// Water body held by a closed shell below `lid_z`.
///
/// A voxel holds water when its centre lies below the lid and above the
/// terrain of its column (the topmost mesh hit, or the middle of the topmost
/// shell run where the mesh has a hole, in which case shell voxels are never
/// water), and it cannot be reached from the
/// sides or bottom of the grid through unoccupied voxels below the lid. The
/// largest 6-connected body is kept, with enclosed cavities filled.
pub fn fill_basin(shell: &VoxelGrid, mesh: &TriMesh, lid_z: f64) -> Result<VoxelGrid> {
    if !lid_z.is_finite() {
        return Err(Error::Parameter(format!("lid height {lid_z} is not finite")));
    }
    let [nx, ny, nz] = shell.dims;
    let s = shell.spacing;
    let mut terrain = column_tops(shell, mesh);
    let hit: Vec<bool> = terrain.iter().map(|t| !t.is_nan()).collect();
    for j in 0..ny {
        for i in 0..nx {
            let t = &mut terrain[i + nx * j];
            if hit[i + nx * j] {
                continue;
            }
            if let Some(top) = (0..nz).rev().find(|&k| shell.get(i, j, k)) {
                let mut bottom = top;
                while bottom > 0 && shell.get(i, j, bottom - 1) {
                    bottom -= 1;
                }
                *t = shell.origin[2] + 0.5 * (top + bottom + 1) as f64 * s;
            }
        }
    }
    let below_lid = |k: usize| shell.origin[2] + (k as f64 + 0.5) * s < lid_z;
    let mut reached = vec![false; shell.len()];
    let mut queue = VecDeque::new();
    for k in 0..nz {
        if !below_lid(k) {
            continue;
        }
        for j in 0..ny {
            for i in 0..nx {
                let seed = i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == ny;
                let a = shell.index(i, j, k);
                if seed && !shell.occupied[a] {
                    reached[a] = true;
                    queue.push_back(a);
                }
            }
        }
    }
    while let Some(a) = queue.pop_front() {
        for b in shell.neighbours(a) {
            let kb = b / (nx * ny);
            if !reached[b] && !shell.occupied[b] && below_lid(kb) {
                reached[b] = true;
                queue.push_back(b);
            }
        }
    }
    let mut water = VoxelGrid::empty(shell.origin, s, shell.dims, shell.frame)?;
    for k in 0..nz {
        let zc = shell.origin[2] + (k as f64 + 0.5) * s;
        if zc >= lid_z {
            continue;
        }
        for j in 0..ny {
            for i in 0..nx {
                let t = terrain[i + nx * j];
                let a = shell.index(i, j, k);
                // Without a mesh hit the shell itself is the terrain.
                let solid = !hit[i + nx * j] && shell.occupied[a];
                if !t.is_nan() && zc > t && !reached[a] && !solid {
                    water.occupied[a] = true;
                }
            }
        }
    }
    if water.count() == 0 {
        return Ok(water);
    }
    water.occupied = largest_component_of(&water);
    water.occupied = fill_cavities(&water);
    Ok(water)
}

/// Marching cubes on voxel-centre occupancy (isovalue 0.5) with an empty
/// border, so the result is always closed with outward normals.
pub fn wrap_surface(grid: &VoxelGrid) -> Result<TriMesh> {
    if !grid.occupied.iter().any(|&o| o) {
        return Err(Error::Precondition("no occupied voxels to wrap".into()));
    }
    if grid.touches_boundary() {
        log::warn!("occupancy touches the voxel grid boundary");
    }
    let s = grid.spacing;
    let dims = grid.dims.map(|d| d + 2);
    let layout = GridLayout::new(grid.origin.map(|o| o - 0.5 * s), s, dims)?;
    let mut field = ScalarField::filled(layout, 0.0);
    let [nx, ny, nz] = grid.dims;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if grid.get(i, j, k) {
                    let a = layout.index(i + 1, j + 1, k + 1);
                    field.values[a] = 1.0;
                }
            }
        }
    }
    let mut mesh = marching_cubes(&field, 0.5)?;
    mesh.frame = grid.frame;
    Ok(mesh)
}
