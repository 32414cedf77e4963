//! Regular-grid Poisson surface reconstruction of the bed.

mod mc;
mod solver;
mod splat;

pub use mc::marching_cubes;
pub use solver::{apply_laplacian, dense_laplacian, divergence_rhs, solve_indicator, solve_poisson, SolveReport};
pub use splat::{splat_normals, VectorField3};

use crate::error::{Error, Result};
use crate::field::{GridLayout, ScalarField};
use crate::geom::dist;
use crate::mesh::TriMesh;
use crate::pointcloud::PointCloud;

const MAX_NODES: usize = 64 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionParams {
    /// `None` picks the bounding-box diagonal / 128.
    pub grid_spacing: Option<f64>,
    pub padding_cells: usize,
    pub cg_tolerance: f64,
    pub cg_max_iters: usize,
    pub splat_radius_cells: usize,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        ReconstructionParams {
            grid_spacing: None,
            padding_cells: 8,
            cg_tolerance: 1e-7,
            cg_max_iters: 20_000,
            splat_radius_cells: 3,
        }
    }
}

impl ReconstructionParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.grid_spacing {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Parameter(format!("grid spacing {h} must be positive")));
            }
        }
        if self.padding_cells < 2 {
            return Err(Error::Parameter(format!(
                "padding_cells {} must be at least 2",
                self.padding_cells
            )));
        }
        if !(self.cg_tolerance > 0.0 && self.cg_tolerance < 1.0) {
            return Err(Error::Parameter(format!(
                "cg tolerance {} outside (0, 1)",
                self.cg_tolerance
            )));
        }
        if self.cg_max_iters == 0 {
            return Err(Error::Parameter("cg_max_iters must be at least 1".into()));
        }
        if self.splat_radius_cells == 0 {
            return Err(Error::Parameter("splat radius must be at least one cell".into()));
        }
        Ok(())
    }

    /// Grid enclosing the cloud with `padding_cells` of margin on every side.
    pub fn layout_for(&self, cloud: &PointCloud) -> Result<GridLayout> {
        self.validate()?;
        let (lo, hi) = cloud
            .bounds()
            .ok_or_else(|| Error::Precondition("cannot reconstruct an empty cloud".into()))?;
        let h = match self.grid_spacing {
            Some(h) => h,
            None => {
                let d = dist(lo, hi);
                if d == 0.0 {
                    return Err(Error::Degenerate("cloud is a single point".into()));
                }
                d / 128.0
            }
        };
        let pad = self.padding_cells;
        let mut dims = [0usize; 3];
        for a in 0..3 {
            let cells = ((hi[a] - lo[a]) / h).ceil();
            if !(cells < 1e7) {
                return Err(Error::Resolution(format!("grid spacing {h} is too fine")));
            }
            dims[a] = cells as usize + 1 + 2 * pad;
        }
        let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if total.map_or(true, |t| t > MAX_NODES) {
            return Err(Error::Resolution(format!(
                "grid {}x{}x{} at spacing {h} m exceeds the node budget",
                dims[0], dims[1], dims[2]
            )));
        }
        let p = pad as f64 * h;
        GridLayout::new([lo[0] - p, lo[1] - p, lo[2] - p], h, dims)
    }
}

pub fn build_vector_field(cloud: &PointCloud, params: &ReconstructionParams) -> Result<VectorField3> {
    if cloud.normals.is_none() {
        return Err(Error::Precondition("point cloud has no normals".into()));
    }
    let layout = params.layout_for(cloud)?;
    splat_normals(cloud, layout, params.splat_radius_cells)
}

/// Mean of the trilinear samples of `chi` at the cloud's points.
pub fn choose_isovalue(chi: &ScalarField, cloud: &PointCloud) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::Precondition("no points to sample".into()));
    }
    let mut acc = 0.0;
    for (i, p) in cloud.points.iter().enumerate() {
        acc += chi.sample_trilinear(*p).ok_or_else(|| {
            Error::Coverage(format!("point {i} at ({}, {}, {}) lies outside the field", p[0], p[1], p[2]))
        })?;
    }
    Ok(acc / cloud.len() as f64)
}

/// Intermediate products of a reconstruction, kept for diagnostics.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub mesh: TriMesh,
    pub chi: ScalarField,
    pub isovalue: f64,
    pub report: SolveReport,
}

pub fn reconstruct_detailed(cloud: &PointCloud, params: &ReconstructionParams) -> Result<Reconstruction> {
    let v = build_vector_field(cloud, params)?;
    let (chi, report) = solve_indicator(&v, params.cg_tolerance, params.cg_max_iters)?;
    let isovalue = choose_isovalue(&chi, cloud)?;
    let mut mesh = marching_cubes(&chi, isovalue)?;
    mesh.frame = cloud.frame;
    Ok(Reconstruction { mesh, chi, isovalue, report })
}

/// Oriented cloud to an isosurface mesh whose normals follow the input normals.
pub fn reconstruct(cloud: &PointCloud, params: &ReconstructionParams) -> Result<TriMesh> {
    reconstruct_detailed(cloud, params).map(|r| r.mesh)
}
