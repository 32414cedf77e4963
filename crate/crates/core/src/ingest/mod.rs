//! File formats at the pipeline boundary: depth logs, geotags, meshes and offsets.

mod depth_log;
mod geotag;
mod obj;
mod offsets;
mod ply;

use std::path::Path;

pub use depth_log::{parse_depth_log, write_depth_log, DepthSample, ParseReport, SkipReason};
pub use geotag::{parse_geotags, write_geotags, GeoTagRecord};
pub use obj::{encode_obj, read_obj_mesh};
pub use offsets::{parse_offsets, write_offsets, OffsetRecord};
pub use ply::{encode_ply, parse_ply, read_ply_mesh, PlyData};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    PlyAscii,
    PlyBinaryLe,
    Obj,
}

impl MeshFormat {
    /// `.obj` maps to OBJ; `.ply` to binary PLY.
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::PlyBinaryLe),
            _ => None,
        }
    }

    pub fn parse_name(s: &str) -> Option<MeshFormat> {
        match s {
            "ply_ascii" | "ply-ascii" => Some(MeshFormat::PlyAscii),
            "ply_binary_le" | "ply-binary" | "ply" => Some(MeshFormat::PlyBinaryLe),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

/// Decodes a mesh. Either PLY encoding is accepted for the PLY formats; the header decides.
pub fn decode_mesh(bytes: &[u8], format: MeshFormat) -> Result<TriMesh> {
    match format {
        MeshFormat::PlyAscii | MeshFormat::PlyBinaryLe => read_ply_mesh(bytes),
        MeshFormat::Obj => read_obj_mesh(bytes),
    }
}

pub fn encode_mesh(mesh: &TriMesh, format: MeshFormat) -> Result<Vec<u8>> {
    mesh.validate()?;
    Ok(match format {
        MeshFormat::PlyAscii => encode_ply(&mesh.vertices, None, &mesh.faces, mesh.frame, false),
        MeshFormat::PlyBinaryLe => encode_ply(&mesh.vertices, None, &mesh.faces, mesh.frame, true),
        MeshFormat::Obj => encode_obj(mesh),
    })
}

pub fn read_mesh(path: &Path, format: MeshFormat) -> Result<TriMesh> {
    let bytes = std::fs::read(path)?;
    decode_mesh(&bytes, format)
}

/// Reads a mesh choosing the format from the file extension.
pub fn read_mesh_auto(path: &Path) -> Result<TriMesh> {
    let format = MeshFormat::from_path(path).ok_or_else(|| {
        Error::Parameter(format!("cannot infer mesh format of {}", path.display()))
    })?;
    read_mesh(path, format)
}

/// Writes a mesh and returns the number of bytes written.
pub fn write_mesh(mesh: &TriMesh, path: &Path, format: MeshFormat) -> Result<usize> {
    let bytes = encode_mesh(mesh, format)?;
    std::fs::write(path, &bytes)?;
    Ok(bytes.len())
}
