//! Indexed triangle meshes and the coordinate frame they live in.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};

/// Coordinate frame carried by meshes and point clouds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Frame {
    /// Unreferenced local metric coordinates.
    #[default]
    Local,
    /// UTM meters (easting, northing, z) in one zone.
    Utm { zone: u8, north: bool },
    /// Longitude and latitude in degrees, z in meters.
    Wgs84,
}

impl Frame {
    pub fn is_utm(&self) -> bool {
        matches!(self, Frame::Utm { .. })
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Local => write!(f, "local"),
            Frame::Utm { zone, north } => {
                write!(f, "utm/{}{}", zone, if *north { 'N' } else { 'S' })
            }
            Frame::Wgs84 => write!(f, "wgs84"),
        }
    }
}

impl FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "local" => return Ok(Frame::Local),
            "wgs84" => return Ok(Frame::Wgs84),
            _ => {}
        }
        let rest = s
            .strip_prefix("utm/")
            .ok_or_else(|| Error::Frame(format!("unknown frame tag '{s}'")))?;
        let (digits, hemi) = rest.split_at(rest.len().saturating_sub(1));
        let north = match hemi {
            "N" | "n" => true,
            "S" | "s" => false,
            _ => return Err(Error::Frame(format!("missing hemisphere in '{s}'"))),
        };
        let zone: u8 = digits
            .parse()
            .map_err(|_| Error::Frame(format!("bad zone in '{s}'")))?;
        if !(1..=60).contains(&zone) {
            return Err(Error::Frame(format!("zone {zone} outside 1..=60")));
        }
        Ok(Frame::Utm { zone, north })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub frame: Frame,
}

impl TriMesh {
    /// Builds a mesh after checking index range, face degeneracy and finiteness.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>, frame: Frame) -> Result<Self> {
        let mesh = TriMesh {
            vertices,
            faces,
            frame,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn empty(frame: Frame) -> Self {
        TriMesh {
            vertices: Vec::new(),
            faces: Vec::new(),
            frame,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self
            .vertices
            .iter()
            .position(|v| !v.iter().all(|c| c.is_finite()))
        {
            return Err(Error::Precondition(format!("vertex {i} is not finite")));
        }
        let n = self.vertices.len();
        for (fi, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&i| i as usize >= n) {
                return Err(Error::Precondition(format!(
                    "face {fi} references a vertex outside 0..{n}"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Precondition(format!("face {fi} is degenerate")));
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangle(f);
        geom::triangle_area(a, b, c)
    }

    pub fn surface_area(&self) -> f64 {
        let mut acc = geom::KahanSum::default();
        for f in 0..self.faces.len() {
            acc.add(self.face_area(f));
        }
        acc.value()
    }

    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        geom::bounds(&self.vertices)
    }

    /// Reverses the winding of every face.
    pub fn flipped(&self) -> TriMesh {
        TriMesh {
            vertices: self.vertices.clone(),
            faces: self.faces.iter().map(|f| [f[0], f[2], f[1]]).collect(),
            frame: self.frame,
        }
    }

    pub fn translated(&self, d: Vec3) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|&v| geom::add(v, d)).collect(),
            faces: self.faces.clone(),
            frame: self.frame,
        }
    }

    /// Keeps the faces flagged in `keep`, then drops vertices no face references.
    /// Relative order of faces and vertices is preserved.
    pub fn retain_faces(&self, keep: &[bool]) -> TriMesh {
        let mut used = vec![false; self.vertices.len()];
        for (f, &k) in self.faces.iter().zip(keep) {
            if k {
                for &i in f {
                    used[i as usize] = true;
                }
            }
        }
        let mut remap = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if used[i] {
                remap[i] = vertices.len() as u32;
                vertices.push(*v);
            }
        }
        let faces = self
            .faces
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(f, _)| [remap[f[0] as usize], remap[f[1] as usize], remap[f[2] as usize]])
            .collect();
        TriMesh {
            vertices,
            faces,
            frame: self.frame,
        }
    }

    /// Number of face-connected components, where faces are adjacent when they share an edge.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let mut uf = geom::UnionFind::new(self.faces.len());
        let mut first: HashMap<(u32, u32), usize> = HashMap::new();
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(f[k], f[(k + 1) % 3]);
                match first.get(&key) {
                    Some(&other) => uf.union(fi, other),
                    None => {
                        first.insert(key, fi);
                    }
                }
            }
        }
        let mut label_of_root: HashMap<usize, usize> = HashMap::new();
        let mut labels = Vec::with_capacity(self.faces.len());
        for fi in 0..self.faces.len() {
            let root = uf.find(fi);
            let next = label_of_root.len();
            labels.push(*label_of_root.entry(root).or_insert(next));
        }
        let count = label_of_root.len();
        (labels, count)
    }
}

#[inline]
pub(crate) fn edge_key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}
