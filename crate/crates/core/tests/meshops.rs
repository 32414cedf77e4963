mod common;

use lakemesh::ingest::OffsetRecord;
use lakemesh::mesh::{Frame, TriMesh};
use lakemesh::meshops::{
    close_gaps, georeference, merge, repair, voxelize, watertight_check, wrap_surface, RepairOptions, VoxelGrid,
};
use lakemesh::pointcloud::Polygon2D;
use proptest::prelude::*;

const UTM14: Frame = Frame::Utm { zone: 14, north: true };

/// Bumpy height-field sheet with `spikes` long faces hanging off random vertices
/// and an optional floating triangle.
fn noisy_sheet(n: usize, heights: &[f64], spikes: &[(usize, f64)], floater: bool) -> TriMesh {
    let mut v = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            v.push([i as f64, j as f64, heights[(i + j * (n + 1)) % heights.len()]]);
        }
    }
    let id = |i: usize, j: usize| (i + (n + 1) * j) as u32;
    let mut f = Vec::new();
    for j in 0..n {
        for i in 0..n {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let nv = v.len();
    for &(at, len) in spikes {
        let a = at % nv;
        let b = (at * 7 + 3) % nv;
        if a == b {
            continue;
        }
        let p = v[a];
        v.push([p[0] + len, p[1] + len, p[2] - len]);
        f.push([a as u32, b as u32, (v.len() - 1) as u32]);
    }
    if floater {
        let b = v.len() as u32;
        v.extend([[0.0, 0.0, 50.0], [1.0, 0.0, 50.0], [0.0, 1.0, 50.0]]);
        f.push([b, b + 1, b + 2]);
    }
    TriMesh::new(v, f, Frame::Local).unwrap()
}

fn random_grid(dims: [usize; 3], bits: &[bool]) -> VoxelGrid {
    let mut g = VoxelGrid::empty([0.0; 3], 0.5, dims, Frame::Local).unwrap();
    for (o, &b) in g.occupied.iter_mut().zip(bits.iter().cycle()) {
        *o = b;
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn repair_never_adds_geometry(
        n in 2usize..12,
        heights in prop::collection::vec(-0.3f64..0.3, 1..20),
        spikes in prop::collection::vec((0usize..1000, 0.1f64..40.0), 0..8),
        floater in any::<bool>(),
        alpha in prop::option::of(1.5f64..8.0),
        clip in prop::option::of(-0.5f64..0.5),
        margin in prop::option::of(0.0f64..2.0),
        largest in any::<bool>(),
    ) {
        let m = noisy_sheet(n, &heights, &spikes, floater);
        let fp = margin.map(|mg| {
            let h = n as f64 / 2.0;
            (Polygon2D::new(vec![[0.0, 0.0], [h, 0.0], [h, h], [0.0, h]]).unwrap(), mg)
        });
        let opts = RepairOptions { alpha, clip_below: clip, footprint: fp, largest_component: largest };
        let (out, rep) = repair(&m, &opts).unwrap();
        prop_assert!(out.face_count() <= m.face_count());
        prop_assert!(out.vertex_count() <= m.vertex_count());
        let removed = rep.faces_removed_long_edge + rep.faces_removed_footprint + rep.faces_clipped;
        prop_assert!(removed <= m.face_count() - out.face_count());
        out.validate().unwrap();
    }

    #[test]
    fn georeference_round_trip_is_exact_on_dyadic_coordinates(
        pts in prop::collection::vec([-4096i32..4096, -4096i32..4096, -512i32..512], 3..30),
        e in 166_000i64..834_000, n in 0i64..9_300_000, z in -100i64..4000,
    ) {
        let verts: Vec<[f64; 3]> = pts.iter().map(|p| p.map(|c| c as f64 / 1024.0)).collect();
        let k = verts.len() as u32;
        let faces = (0..k - 2).map(|i| [i, i + 1, i + 2]).collect();
        let m = TriMesh::new(verts, faces, Frame::Local).unwrap();
        let off = OffsetRecord { offset_e: e as f64 + 0.5, offset_n: n as f64 + 0.25, offset_z: z as f64 / 8.0 };
        let g = georeference(&m, &off, UTM14).unwrap();
        for (a, b) in g.vertices.iter().zip(&m.vertices) {
            let back = [a[0] - off.offset_e, a[1] - off.offset_n, a[2] - off.offset_z];
            prop_assert_eq!(back.map(f64::to_bits), b.map(f64::to_bits));
        }
    }

    #[test]
    fn georeference_round_trip_within_half_ulp(
        pts in prop::collection::vec([-500.0f64..500.0, -500.0f64..500.0, -20.0f64..20.0], 3..30),
        e in 166_000.0f64..834_000.0, n in 0.0f64..9_300_000.0,
    ) {
        let k = pts.len() as u32;
        let m = TriMesh::new(pts, (0..k - 2).map(|i| [i, i + 1, i + 2]).collect(), Frame::Local).unwrap();
        let off = OffsetRecord { offset_e: e, offset_n: n, offset_z: 312.0 };
        let g = georeference(&m, &off, UTM14).unwrap();
        let ulp = |x: f64| f64::from_bits(x.abs().to_bits() + 1) - x.abs();
        for (a, b) in g.vertices.iter().zip(&m.vertices) {
            prop_assert!((a[0] - off.offset_e - b[0]).abs() <= ulp(e + 500.0));
            prop_assert!((a[1] - off.offset_n - b[1]).abs() <= ulp(n + 500.0));
        }
    }

    #[test]
    fn merge_without_welding_preserves_counts(
        sizes in prop::collection::vec(2usize..6, 1..5),
        shift in 0.0f64..0.5,
    ) {
        let meshes: Vec<TriMesh> = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut m = noisy_sheet(n, &[0.0], &[], false).translated([i as f64 * shift, 0.0, 0.0]);
                m.frame = UTM14;
                m
            })
            .collect();
        let (out, rep) = merge(&meshes, 0.0).unwrap();
        prop_assert_eq!(out.face_count(), meshes.iter().map(TriMesh::face_count).sum::<usize>());
        prop_assert_eq!(out.vertex_count(), meshes.iter().map(TriMesh::vertex_count).sum::<usize>());
        prop_assert_eq!(rep.vertices_welded, 0);
    }

    #[test]
    fn close_gaps_is_extensive_and_idempotent(
        dims in [2usize..9, 2usize..9, 2usize..9],
        bits in prop::collection::vec(prop::bool::weighted(0.3), 1..64),
        r in 1usize..3,
    ) {
        let g = random_grid(dims, &bits);
        let c = close_gaps(&g, r).unwrap();
        prop_assert!(g.occupied.iter().zip(&c.occupied).all(|(&a, &b)| !a || b));
        let cc = close_gaps(&c, r).unwrap();
        prop_assert_eq!(&cc.occupied, &c.occupied);
    }

    #[test]
    fn wrapped_occupancy_is_closed(
        dims in [1usize..7, 1usize..7, 1usize..7],
        bits in prop::collection::vec(prop::bool::weighted(0.5), 1..50),
    ) {
        let g = random_grid(dims, &bits);
        prop_assume!(g.count() > 0);
        let w = wrap_surface(&g).unwrap();
        let rep = watertight_check(&w);
        prop_assert!(rep.closed, "{:?}", rep);
    }
}

#[test]
fn sphere_shell_voxelizes_and_wraps_closed() {
    let s = common::sphere_mesh(3.0, 0.25);
    let g = voxelize(&s, 0.5).unwrap();
    let closed = close_gaps(&g, 1).unwrap();
    assert!(closed.count() >= g.count());
    assert!(watertight_check(&wrap_surface(&closed).unwrap()).closed);
}
