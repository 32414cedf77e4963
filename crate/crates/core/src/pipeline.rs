//! Pipeline stages shared by the individual subcommands and the one-shot run,
//! so both produce identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::ingest::{encode_mesh, encode_ply, parse_depth_log, parse_ply, MeshFormat, OffsetRecord, ParseReport};
use crate::mesh::TriMesh;
use crate::meshops::{
    close_gaps, fill_basin, georeference, solidify_columns, merge, repair, voxelize, watertight_check, wrap_surface, MergeReport,
    RepairOptions, RepairReport, WatertightReport,
};
use crate::pointcloud::{convex_hull_2d, estimate_normals, hull_centroid, rasterize_depth_map, to_utm_cloud, Point2, PointCloud, Polygon2D};
use crate::poisson::{reconstruct_detailed, SolveReport};
use crate::volume::{stage_storage_curve, StageStorageCurve};

pub const NODATA: f64 = -9999.0;

#[derive(Debug, Clone)]
pub struct Ingested {
    pub cloud: PointCloud,
    pub report: ParseReport,
    pub samples: usize,
    /// Centre of the survey's convex hull, in the cloud's frame.
    pub centroid: Point2,
}

/// Depth log to a deduplicated UTM point cloud.
pub fn ingest_log(bytes: &[u8], cfg: &PipelineConfig) -> Result<Ingested> {
    let (samples, report) = parse_depth_log(bytes)?;
    let cloud = to_utm_cloud(&samples, cfg.waterline_z, cfg.utm_zone)?.dedupe(cfg.dedupe_tolerance);
    let centroid = footprint(&cloud).and_then(|h| hull_centroid(&h)).unwrap_or_else(|_| {
        let n = cloud.len() as f64;
        let s = cloud.points.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        [s[0] / n, s[1] / n]
    });
    Ok(Ingested { cloud, report, samples: samples.len(), centroid })
}

/// Convex hull of the cloud's horizontal positions.
pub fn footprint(cloud: &PointCloud) -> Result<Polygon2D> {
    convex_hull_2d(&cloud.en())
}

/// Point cloud as an ASCII PLY with no faces.
pub fn encode_cloud(cloud: &PointCloud) -> Vec<u8> {
    encode_ply(&cloud.points, cloud.normals.as_deref(), &[], cloud.frame, false)
}

pub fn decode_cloud(bytes: &[u8]) -> Result<PointCloud> {
    let d = parse_ply(bytes)?;
    Ok(PointCloud { points: d.vertices, normals: d.normals, frame: d.frame })
}

pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    decode_cloud(&fs::read(path)?)
}

/// Gridded elevation of the cloud as an ESRI ASCII grid.
pub fn depth_map(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<Vec<u8>> {
    let grid = rasterize_depth_map(cloud, cfg.depthmap_spacing, cfg.idw_power, cfg.idw_radius)?;
    let mut out = Vec::new();
    grid.write_ascii_grid(&mut out, NODATA)?;
    Ok(out)
}

/// Estimates normals and runs the Poisson reconstruction.
pub fn reconstruct_bed(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<(TriMesh, SolveReport)> {
    let oriented = estimate_normals(cloud, cfg.normal_k)?;
    let r = reconstruct_detailed(&oriented, &cfg.reconstruction_params())?;
    Ok((r.mesh, r.report))
}

/// Bed repair: long edges, then trim to the survey hull, then the largest piece.
pub fn bed_repair_options(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<RepairOptions> {
    Ok(RepairOptions {
        alpha: Some(cfg.repair_alpha),
        clip_below: None,
        footprint: Some((footprint(cloud)?, cfg.footprint_margin)),
        largest_component: true,
    })
}

/// Bank repair: long edges, then everything below the waterline, then the
/// largest piece.
pub fn bank_repair_options(cfg: &PipelineConfig) -> RepairOptions {
    RepairOptions {
        alpha: Some(cfg.repair_alpha),
        clip_below: Some(cfg.waterline_z),
        footprint: None,
        largest_component: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CloseReport {
    pub shell_voxels: usize,
    /// Shell plus ground below the surface, when a lid was given.
    pub ground_voxels: Option<usize>,
    pub closed_voxels: usize,
    /// Voxels of the filled basin, when a lid was given.
    pub water_voxels: Option<usize>,
    pub dims: [usize; 3],
}

/// Voxelizes, closes gaps up to `radius` voxels and wraps the result in a
/// closed surface. With a lid, the ground under the surface is made solid
/// before closing and the wrapped body is the water held below the lid.
pub fn close_mesh(mesh: &TriMesh, spacing: f64, radius: usize, lid: Option<f64>) -> Result<(TriMesh, CloseReport)> {
    let shell = voxelize(mesh, spacing)?;
    let ground = lid.map(|_| solidify_columns(&shell, mesh));
    let closed = close_gaps(ground.as_ref().unwrap_or(&shell), radius)?;
    let (solid, water) = match lid {
        Some(z) => {
            let w = fill_basin(&closed, mesh, z)?;
            let n = w.count();
            (w, Some(n))
        }
        None => (closed.clone(), None),
    };
    let mut out = wrap_surface(&solid)?;
    out.frame = mesh.frame;
    Ok((
        out,
        CloseReport {
            shell_voxels: shell.count(),
            ground_voxels: ground.map(|g| g.count()),
            closed_voxels: closed.count(),
            water_voxels: water,
            dims: shell.dims,
        },
    ))
}

/// Levels relative to `lid` every `step` meters from just above the mesh's
/// lowest point up to the lid.
pub fn auto_levels(mesh: &TriMesh, lid: f64, step: f64) -> Vec<f64> {
    let zmin = mesh.bounds().map_or(lid, |(lo, _)| lo[2]);
    let n = ((lid - zmin) / step).floor().max(0.0) as i64;
    (-n..=0).map(|k| k as f64 * step).collect()
}

pub fn volume_curve(mesh: &TriMesh, cfg: &PipelineConfig) -> Result<StageStorageCurve> {
    watertight_check(mesh).require_closed()?;
    let lid = cfg.lid();
    let levels = cfg.levels.clone().unwrap_or_else(|| auto_levels(mesh, lid, cfg.level_step));
    stage_storage_curve(mesh, &levels, lid, cfg.capacity_spacing)
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub samples: usize,
    pub skipped_lines: usize,
    pub cloud_points: usize,
    pub centroid: Point2,
    pub solve: SolveReport,
    pub bed_raw_faces: usize,
    pub bed_repair: RepairReport,
    pub bank_repairs: Vec<RepairReport>,
    pub merge: MergeReport,
    pub close: CloseReport,
    pub watertight: WatertightReport,
    pub curve: StageStorageCurve,
}

impl PipelineReport {
    /// Deterministic text summary: no timings or paths.
    pub fn to_text(&self) -> String {
        let mut s = String::from("lakemesh pipeline report\n");
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "skipped_lines = {}", self.skipped_lines);
        let _ = writeln!(s, "cloud_points = {}", self.cloud_points);
        let _ = writeln!(s, "hull_centroid = {} {}", self.centroid[0], self.centroid[1]);
        let _ = writeln!(s, "cg_iterations = {}", self.solve.iterations);
        let _ = writeln!(s, "cg_residual = {:e}", self.solve.residual);
        let _ = writeln!(s, "bed_raw_faces = {}", self.bed_raw_faces);
        write_repair(&mut s, "bed", &self.bed_repair);
        for (i, r) in self.bank_repairs.iter().enumerate() {
            write_repair(&mut s, &format!("bank_{i}"), r);
        }
        let _ = writeln!(s, "merge.vertices_welded = {}", self.merge.vertices_welded);
        let _ = writeln!(s, "merge.faces_collapsed = {}", self.merge.faces_collapsed);
        let c = &self.close;
        let _ = writeln!(s, "close.grid = {} {} {}", c.dims[0], c.dims[1], c.dims[2]);
        let _ = writeln!(s, "close.shell_voxels = {}", c.shell_voxels);
        if let Some(g) = c.ground_voxels {
            let _ = writeln!(s, "close.ground_voxels = {g}");
        }
        let _ = writeln!(s, "close.closed_voxels = {}", c.closed_voxels);
        if let Some(w) = c.water_voxels {
            let _ = writeln!(s, "close.water_voxels = {w}");
        }
        let _ = writeln!(s, "watertight = {}", self.watertight.closed);
        let _ = writeln!(s, "capacity_error_bound_m3 = {}", self.curve.error_bound);
        for (l, v) in self.curve.levels.iter().zip(&self.curve.capacities) {
            let _ = writeln!(s, "capacity[{l}] = {v}");
        }
        s
    }
}

fn write_repair(s: &mut String, name: &str, r: &RepairReport) {
    let _ = writeln!(
        s,
        "{name}.repair = long_edge {} footprint {} clipped {} components {}",
        r.faces_removed_long_edge, r.faces_removed_footprint, r.faces_clipped, r.components_removed
    );
}

fn put(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn put_mesh(dir: &Path, name: &str, mesh: &TriMesh) -> Result<()> {
    put(dir, name, &encode_mesh(mesh, MeshFormat::PlyAscii)?)
}

/// Full chain from a depth log and local-frame bank meshes to a closed lake
/// mesh and its stage-storage curve, writing every intermediate into `out`.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    log: &[u8],
    banks: &[(TriMesh, OffsetRecord)],
    out: &Path,
) -> Result<PipelineReport> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let ing = ingest_log(log, cfg)?;
    put(out, "cloud.ply", &encode_cloud(&ing.cloud))?;
    put(out, "depthmap.asc", &depth_map(&ing.cloud, cfg)?)?;

    let (bed_raw, solve) = reconstruct_bed(&ing.cloud, cfg)?;
    put_mesh(out, "bed_raw.ply", &bed_raw)?;
    let (bed, bed_repair) = repair(&bed_raw, &bed_repair_options(&ing.cloud, cfg)?)?;
    if bed.is_empty() {
        return Err(Error::Degenerate("bed repair removed every face".into()));
    }
    put_mesh(out, "bed.ply", &bed)?;

    let mut parts = vec![bed];
    let mut bank_repairs = Vec::new();
    for (i, (mesh, offset)) in banks.iter().enumerate() {
        let g = georeference(mesh, offset, ing.cloud.frame)?;
        put_mesh(out, &format!("bank_{i}_georef.ply"), &g)?;
        let (r, rep) = repair(&g, &bank_repair_options(cfg))?;
        put_mesh(out, &format!("bank_{i}_repaired.ply"), &r)?;
        bank_repairs.push(rep);
        parts.push(r);
    }
    let (merged, merge_report) = merge(&parts, cfg.weld_tolerance)?;
    put_mesh(out, "merged.ply", &merged)?;

    let (closed, close) = close_mesh(&merged, cfg.voxel_spacing, cfg.close_radius, Some(cfg.lid()))?;
    put_mesh(out, "closed.ply", &closed)?;
    let watertight = watertight_check(&closed);
    let curve = volume_curve(&closed, cfg)?;
    put(out, "curve.csv", curve.to_csv().as_bytes())?;
    put(out, "curve.dat", curve.to_plot_data().as_bytes())?;

    let report = PipelineReport {
        samples: ing.samples,
        skipped_lines: ing.report.skipped_count(),
        cloud_points: ing.cloud.len(),
        centroid: ing.centroid,
        solve,
        bed_raw_faces: bed_raw.face_count(),
        bed_repair,
        bank_repairs,
        merge: merge_report,
        close,
        watertight,
        curve,
    };
    put(out, "report.txt", report.to_text().as_bytes())?;
    Ok(report)
}
