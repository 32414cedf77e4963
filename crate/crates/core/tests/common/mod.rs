#![allow(dead_code)]

use std::panic::{catch_unwind, AssertUnwindSafe};

use lakemesh::field::{GridLayout, ScalarField};
use lakemesh::ingest::{decode_mesh, encode_mesh, parse_depth_log, parse_geotags, parse_offsets, parse_ply, MeshFormat};
use lakemesh::geom::Vec3;
use lakemesh::mesh::{Frame, TriMesh};
use lakemesh::meshops::{close_gaps, merge, solidify_columns, voxelize, VoxelGrid};
use lakemesh::poisson::marching_cubes;
use std::collections::{HashMap, HashSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Marching-cubes sphere of radius `r` centred at the origin, from its signed
/// distance sampled at `spacing`. Normals point inward (toward low values).
pub fn sphere_mesh(r: f64, spacing: f64) -> TriMesh {
    let n = (2.0 * (r + 2.0 * spacing) / spacing).ceil() as usize + 1;
    let o = -(n as f64 - 1.0) * spacing / 2.0;
    let layout = GridLayout::new([o, o, o], spacing, [n, n, n]).unwrap();
    let sdf = ScalarField::from_fn(layout, |p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - r);
    marching_cubes(&sdf, 0.0).unwrap()
}

pub fn tetra() -> TriMesh {
    TriMesh::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        Frame::Utm { zone: 14, north: true },
    )
    .unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    DepthLog,
    Geotags,
    Offsets,
    PlyAscii,
    PlyBinary,
    Obj,
}

pub const TARGETS: [Target; 6] =
    [Target::DepthLog, Target::Geotags, Target::Offsets, Target::PlyAscii, Target::PlyBinary, Target::Obj];

fn seed_document(t: Target) -> Vec<u8> {
    match t {
        Target::DepthLog => b"# log\n1600000000,30.62,-96.34,1.25\n30.6201,-96.3401,2.5\n1600000002,30.6202,-96.3402,0.75\n".to_vec(),
        Target::Geotags => b"image_id,lat,lon,alt,timestamp\nIMG_0001,30.62,-96.34,33.5,1600000000\nIMG_0002,,,,1600000001\n".to_vec(),
        Target::Offsets => b"754985.5 3390505.75 0\n".to_vec(),
        Target::PlyAscii => encode_mesh(&tetra(), MeshFormat::PlyAscii).unwrap(),
        Target::PlyBinary => encode_mesh(&tetra(), MeshFormat::PlyBinaryLe).unwrap(),
        Target::Obj => encode_mesh(&tetra(), MeshFormat::Obj).unwrap(),
    }
}

const TOKENS: [&str; 12] = [
    "nan", "-inf", "1e309", "-1", "4294967295", "99999999999999999999", ",", "\n", " ", "element face 1000000000\n", "\0", "ply\n",
];

/// Seeded mutation of a valid document: byte flips, deletions, duplications,
/// truncation and hostile token insertion.
pub fn mutate(t: Target, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut d = seed_document(t);
    for _ in 0..rng.gen_range(1..=6) {
        let len = d.len().max(1);
        match rng.gen_range(0..6) {
            0 => {
                let i = rng.gen_range(0..len).min(d.len().saturating_sub(1));
                if !d.is_empty() {
                    d[i] ^= 1 << rng.gen_range(0..8);
                }
            }
            1 => {
                let a = rng.gen_range(0..len);
                let b = (a + rng.gen_range(0..16)).min(d.len());
                if a < b {
                    d.drain(a..b);
                }
            }
            2 => {
                let a = rng.gen_range(0..len).min(d.len());
                let b = (a + rng.gen_range(0..32)).min(d.len());
                let chunk = d[a..b].to_vec();
                let at = rng.gen_range(0..=d.len());
                d.splice(at..at, chunk);
            }
            3 => {
                let at = rng.gen_range(0..=d.len());
                d.truncate(at);
            }
            4 => {
                let tok = TOKENS[rng.gen_range(0..TOKENS.len())].as_bytes();
                let at = rng.gen_range(0..=d.len());
                d.splice(at..at, tok.iter().copied());
            }
            _ => {
                let n = rng.gen_range(1..16);
                let at = rng.gen_range(0..=d.len());
                let junk: Vec<u8> = (0..n).map(|_| rng.gen()).collect();
                d.splice(at..at, junk);
            }
        }
    }
    d
}

fn parse(t: Target, bytes: &[u8]) {
    match t {
        Target::DepthLog => {
            let _ = parse_depth_log(bytes);
        }
        Target::Geotags => {
            let _ = parse_geotags(bytes);
        }
        Target::Offsets => {
            let _ = parse_offsets(bytes);
        }
        Target::PlyAscii | Target::PlyBinary => {
            let _ = parse_ply(bytes);
        }
        Target::Obj => {
            let _ = decode_mesh(bytes, MeshFormat::Obj);
        }
    }
}

/// Runs `cases` mutated inputs through the parsers; returns the inputs that panicked.
pub fn fuzz(cases: usize, seed: u64) -> Vec<(Target, Vec<u8>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut crashes = Vec::new();
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    for i in 0..cases {
        let t = TARGETS[i % TARGETS.len()];
        let doc = mutate(t, &mut rng);
        if catch_unwind(AssertUnwindSafe(|| parse(t, &doc))).is_err() {
            crashes.push((t, doc));
        }
    }
    std::panic::set_hook(hook);
    crashes
}

fn face_key(m: &TriMesh, f: usize) -> [u64; 9] {
    let t = m.triangle(f);
    let mut k = [0u64; 9];
    for (i, p) in t.iter().enumerate() {
        for a in 0..3 {
            k[3 * i + a] = p[a].to_bits();
        }
    }
    k
}

/// Indices of `input` faces missing from `output`, matched by exact triangle
/// coordinates (both meshes in the same frame).
pub fn removed_faces(input: &TriMesh, output: &TriMesh) -> Vec<usize> {
    let mut left: HashMap<[u64; 9], usize> = HashMap::new();
    for f in 0..output.face_count() {
        *left.entry(face_key(output, f)).or_default() += 1;
    }
    (0..input.face_count())
        .filter(|&f| match left.get_mut(&face_key(input, f)) {
            Some(c) if *c > 0 => {
                *c -= 1;
                false
            }
            _ => true,
        })
        .collect()
}

/// Precision and recall of the removed faces against the labelled ones.
pub fn precision_recall(removed: &[usize], labelled: &[usize]) -> (f64, f64) {
    let r: HashSet<usize> = removed.iter().copied().collect();
    let l: HashSet<usize> = labelled.iter().copied().collect();
    let hit = r.intersection(&l).count() as f64;
    let p = if r.is_empty() { 1.0 } else { hit / r.len() as f64 };
    let rc = if l.is_empty() { 1.0 } else { hit / l.len() as f64 };
    (p, rc)
}

fn column_centres(mesh: &TriMesh, s: f64) -> Vec<[f64; 2]> {
    let g = voxelize(mesh, s).unwrap();
    let mut cols = HashSet::new();
    for k in 0..g.dims[2] {
        for j in 0..g.dims[1] {
            for i in 0..g.dims[0] {
                if g.get(i, j, k) {
                    cols.insert((i, j));
                }
            }
        }
    }
    let mut out: Vec<[f64; 2]> = cols
        .into_iter()
        .map(|(i, j)| {
            let c = g.center(i, j, 0);
            [c[0], c[1]]
        })
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Horizontal distance from the voxel column of each toe point to the
/// nearest occupied column of `bed`, both voxelized at `s` on a shared
/// lattice. Facing columns on either side of a gap `g` sit `g ± s` apart.
pub fn toe_gaps(bed: &TriMesh, toe: &[Vec3], s: f64) -> Vec<f64> {
    let bed_cols = column_centres(bed, s);
    toe.iter()
        .map(|p| {
            let c = [((p[0] / s).floor() + 0.5) * s, ((p[1] / s).floor() + 0.5) * s];
            bed_cols
                .iter()
                .map(|b| ((b[0] - c[0]).powi(2) + (b[1] - c[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

pub fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Whether the bed and every bank land in one 6-connected component of the
/// solidified occupancy, before closing and after closing at `radius`. Each
/// part is assigned the component holding most of its vertices.
pub fn bridging(bed: &TriMesh, banks: &[TriMesh], s: f64, radius: usize) -> (bool, bool) {
    let mut parts = vec![bed.clone()];
    parts.extend(banks.iter().cloned());
    let (merged, _) = merge(&parts, 0.0).unwrap();
    let solid = solidify_columns(&voxelize(&merged, s).unwrap(), &merged);
    let closed = close_gaps(&solid, radius).unwrap();
    let joined = |g: &VoxelGrid| {
        let (label, _) = g.components();
        let owner = |m: &TriMesh| {
            let mut votes: HashMap<usize, usize> = HashMap::new();
            for v in &m.vertices {
                let idx = [0, 1, 2].map(|a| ((v[a] - g.origin[a]) / s).floor() as usize);
                let cell = g.index(idx[0].min(g.dims[0] - 1), idx[1].min(g.dims[1] - 1), idx[2].min(g.dims[2] - 1));
                if g.occupied[cell] {
                    *votes.entry(label[cell]).or_default() += 1;
                }
            }
            votes.into_iter().max_by_key(|&(l, n)| (n, usize::MAX - l)).map(|(l, _)| l)
        };
        let want = owner(bed);
        want.is_some() && banks.iter().all(|b| owner(b) == want)
    };
    (joined(&solid), joined(&closed))
}

/// Planar bed over `[0, 20]²` reaching `bed_z` at `x = 20` with `dip` drop
/// per meter away from it, and a bank rising at slope 0.5 from its toe at
/// `x = 20 + gap`, `z = 0`.
pub fn plane_and_bank(gap: f64, bed_z: f64, dip: f64, shift: f64) -> (TriMesh, TriMesh) {
    let sheet = |nx: usize, ny: usize, f: &dyn Fn(usize, usize) -> Vec3| {
        let mut v = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                v.push(f(i, j));
            }
        }
        let id = |i: usize, j: usize| (i + (nx + 1) * j) as u32;
        let mut faces = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        TriMesh::new(v, faces, Frame::Local).unwrap()
    };
    let bed = sheet(20, 20, &|i, j| [i as f64 + shift, j as f64 + shift, bed_z - dip * (20.0 - i as f64)]);
    let bank = sheet(6, 20, &|i, j| [20.0 + gap + i as f64 + shift, j as f64 + shift, 0.5 * i as f64]);
    (bed, bank)
}

pub fn rotated_z(m: &TriMesh, angle: f64) -> TriMesh {
    let (sn, cs) = angle.sin_cos();
    let mut out = m.clone();
    for v in &mut out.vertices {
        *v = [cs * v[0] - sn * v[1], sn * v[0] + cs * v[1], v[2]];
    }
    out
}
