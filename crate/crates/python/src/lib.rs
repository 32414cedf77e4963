use std::path::PathBuf;

use lakemesh::config::PipelineConfig;
use lakemesh::geodesy::{self, GeoCoord, Hemisphere, UtmCoord};
use lakemesh::ingest::{read_mesh_auto, write_mesh, MeshFormat, OffsetRecord};
use lakemesh::mesh::{Frame, TriMesh};
use lakemesh::meshops::{self, RepairOptions};
use lakemesh::pipeline;
use lakemesh::pointcloud::PointCloud;
use lakemesh::survey_sim::{simulate_survey, SynthLakeSpec};
use lakemesh::volume;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(lakemesh, LakemeshError, PyValueError);

fn err(e: lakemesh::Error) -> PyErr {
    LakemeshError::new_err(format!("{}: {}", e.class(), e))
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for lakemesh::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn frame(tag: &str) -> PyResult<Frame> {
    tag.parse().py()
}

fn config(text: Option<&str>) -> PyResult<PipelineConfig> {
    match text {
        Some(t) => PipelineConfig::parse(t).py(),
        None => Ok(PipelineConfig::default()),
    }
}

/// Triangle mesh with a coordinate frame tag (`local`, `utm/14N`, `wgs84`).
#[pyclass(name = "TriMesh", module = "lakemesh")]
struct PyTriMesh {
    inner: TriMesh,
}

fn wrap(m: TriMesh) -> PyTriMesh {
    PyTriMesh { inner: m }
}

#[pymethods]
impl PyTriMesh {
    #[new]
    #[pyo3(signature = (vertices, faces, frame = "local"))]
    fn new(vertices: Vec<[f64; 3]>, faces: Vec<[u32; 3]>, frame: &str) -> PyResult<Self> {
        Ok(wrap(TriMesh::new(vertices, faces, self::frame(frame)?).py()?))
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(wrap(read_mesh_auto(&path).py()?))
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        let fmt = MeshFormat::from_path(&path).unwrap_or(MeshFormat::PlyBinaryLe);
        write_mesh(&self.inner, &path, fmt).py()?;
        Ok(())
    }

    #[getter]
    fn vertices(&self) -> Vec<[f64; 3]> {
        self.inner.vertices.clone()
    }

    #[getter]
    fn faces(&self) -> Vec<[u32; 3]> {
        self.inner.faces.clone()
    }

    #[getter]
    fn frame(&self) -> String {
        self.inner.frame.to_string()
    }

    fn __len__(&self) -> usize {
        self.inner.face_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "TriMesh({} vertices, {} faces, {})",
            self.inner.vertex_count(),
            self.inner.face_count(),
            self.inner.frame
        )
    }

    fn surface_area(&self) -> f64 {
        self.inner.surface_area()
    }

    fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        self.inner.bounds()
    }

    fn translated(&self, d: [f64; 3]) -> Self {
        wrap(self.inner.translated(d))
    }

    fn flipped(&self) -> Self {
        wrap(self.inner.flipped())
    }

    /// `(closed, boundary_edges, non_manifold_edges)`.
    fn watertight(&self) -> (bool, usize, usize) {
        let r = meshops::watertight_check(&self.inner);
        (r.closed, r.boundary_edges, r.non_manifold_edges + r.misoriented_edges)
    }

    fn enclosed_volume(&self) -> PyResult<f64> {
        volume::enclosed_volume(&self.inner).py()
    }

    /// `(volume, error_bound)` below `z = level`.
    #[pyo3(signature = (level, spacing = 0.25))]
    fn capacity(&self, level: f64, spacing: f64) -> PyResult<(f64, f64)> {
        let c = volume::capacity_at_level(&self.inner, level, spacing).py()?;
        Ok((c.volume, c.error_bound))
    }

    /// List of `(level, capacity)` with levels relative to `datum`.
    #[pyo3(signature = (levels, datum = 0.0, spacing = 0.25))]
    fn stage_storage(&self, levels: Vec<f64>, datum: f64, spacing: f64) -> PyResult<Vec<(f64, f64)>> {
        let c = volume::stage_storage_curve(&self.inner, &levels, datum, spacing).py()?;
        Ok(c.levels.into_iter().zip(c.capacities).collect())
    }

    fn to_wgs84(&self) -> PyResult<Self> {
        Ok(wrap(meshops::export_wgs84(&self.inner).py()?))
    }
}

/// UTM point cloud from a depth log, optionally with unit normals.
#[pyclass(name = "PointCloud", module = "lakemesh")]
struct PyPointCloud {
    inner: PointCloud,
}

#[pymethods]
impl PyPointCloud {
    #[new]
    #[pyo3(signature = (points, frame = "local"))]
    fn new(points: Vec<[f64; 3]>, frame: &str) -> PyResult<Self> {
        Ok(PyPointCloud { inner: PointCloud::new(points, self::frame(frame)?) })
    }

    #[getter]
    fn points(&self) -> Vec<[f64; 3]> {
        self.inner.points.clone()
    }

    #[getter]
    fn normals(&self) -> Option<Vec<[f64; 3]>> {
        self.inner.normals.clone()
    }

    #[getter]
    fn frame(&self) -> String {
        self.inner.frame.to_string()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PointCloud({} points, {})", self.inner.len(), self.inner.frame)
    }
}

/// `(easting, northing, zone, north)`.
#[pyfunction]
#[pyo3(signature = (lat, lon, zone = None))]
fn wgs84_to_utm(lat: f64, lon: f64, zone: Option<u8>) -> PyResult<(f64, f64, u8, bool)> {
    let u = geodesy::wgs84_to_utm(GeoCoord::new(lat, lon).py()?, zone).py()?;
    Ok((u.easting, u.northing, u.zone, u.hemisphere.is_north()))
}

/// `(lat, lon)`.
#[pyfunction]
fn utm_to_wgs84(easting: f64, northing: f64, zone: u8, north: bool) -> PyResult<(f64, f64)> {
    let g = geodesy::utm_to_wgs84(UtmCoord::new(easting, northing, zone, Hemisphere::from_north(north)).py()?).py()?;
    Ok((g.lat, g.lon))
}

/// Parses a depth log and returns the deduplicated UTM cloud.
#[pyfunction]
#[pyo3(signature = (text, config = None))]
fn ingest(text: &str, config: Option<&str>) -> PyResult<PyPointCloud> {
    let ing = pipeline::ingest_log(text.as_bytes(), &self::config(config)?).py()?;
    Ok(PyPointCloud { inner: ing.cloud })
}

/// Bed surface from a cloud; normals are estimated when missing.
#[pyfunction]
#[pyo3(signature = (cloud, config = None))]
fn reconstruct(cloud: &PyPointCloud, config: Option<&str>) -> PyResult<PyTriMesh> {
    let (m, _) = pipeline::reconstruct_bed(&cloud.inner, &self::config(config)?).py()?;
    Ok(wrap(m))
}

/// Returns the repaired mesh and the number of faces removed.
#[pyfunction]
#[pyo3(signature = (mesh, alpha = Some(4.0), clip_below = None, largest_component = false))]
fn repair(mesh: &PyTriMesh, alpha: Option<f64>, clip_below: Option<f64>, largest_component: bool) -> PyResult<(PyTriMesh, usize)> {
    let opts = RepairOptions { alpha, clip_below, footprint: None, largest_component };
    let (out, _) = meshops::repair(&mesh.inner, &opts).py()?;
    let removed = mesh.inner.face_count() - out.face_count();
    Ok((wrap(out), removed))
}

#[pyfunction]
fn georeference(mesh: &PyTriMesh, offset: (f64, f64, f64), frame: &str) -> PyResult<PyTriMesh> {
    let o = OffsetRecord { offset_e: offset.0, offset_n: offset.1, offset_z: offset.2 };
    Ok(wrap(meshops::georeference(&mesh.inner, &o, self::frame(frame)?).py()?))
}

#[pyfunction]
#[pyo3(signature = (meshes, weld = 1e-3))]
fn merge(meshes: Vec<PyRef<'_, PyTriMesh>>, weld: f64) -> PyResult<PyTriMesh> {
    let parts: Vec<TriMesh> = meshes.iter().map(|m| m.inner.clone()).collect();
    Ok(wrap(meshops::merge(&parts, weld).py()?.0))
}

/// Voxel gap closing; with `lid`, returns the water body below it.
#[pyfunction]
#[pyo3(signature = (mesh, spacing = 0.5, radius = 2, lid = None))]
fn close(mesh: &PyTriMesh, spacing: f64, radius: usize, lid: Option<f64>) -> PyResult<PyTriMesh> {
    Ok(wrap(pipeline::close_mesh(&mesh.inner, spacing, radius, lid).py()?.0))
}

/// Writes a synthetic survey from spec text into `out_dir`; returns the written paths.
#[pyfunction]
fn simulate(spec: &str, out_dir: PathBuf) -> PyResult<Vec<PathBuf>> {
    let s = SynthLakeSpec::parse(spec).py()?;
    simulate_survey(&s).py()?.write_to_dir(&out_dir).py()
}

/// Runs every stage; bank meshes need sibling `.offset` files. Returns the report text.
#[pyfunction]
#[pyo3(signature = (log, banks, out_dir, config = None))]
fn run_pipeline(log: PathBuf, banks: Vec<PathBuf>, out_dir: PathBuf, config: Option<&str>) -> PyResult<String> {
    let cfg = self::config(config)?;
    let bytes = std::fs::read(&log).map_err(|e| err(e.into()))?;
    let mut parts = Vec::new();
    for b in &banks {
        let text = std::fs::read(b.with_extension("offset")).map_err(|e| err(e.into()))?;
        parts.push((read_mesh_auto(b).py()?, lakemesh::ingest::parse_offsets(&text).py()?));
    }
    Ok(pipeline::run_pipeline(&cfg, &bytes, &parts, &out_dir).py()?.to_text())
}

#[pymodule]
#[pyo3(name = "lakemesh")]
fn lakemesh_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LakemeshError", m.py().get_type::<LakemeshError>())?;
    m.add_class::<PyTriMesh>()?;
    m.add_class::<PyPointCloud>()?;
    m.add_function(wrap_pyfunction!(wgs84_to_utm, m)?)?;
    m.add_function(wrap_pyfunction!(utm_to_wgs84, m)?)?;
    m.add_function(wrap_pyfunction!(ingest, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(repair, m)?)?;
    m.add_function(wrap_pyfunction!(georeference, m)?)?;
    m.add_function(wrap_pyfunction!(merge, m)?)?;
    m.add_function(wrap_pyfunction!(close, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
