mod common;

use lakemesh::ingest::{
    decode_mesh, encode_mesh, parse_depth_log, parse_geotags, parse_offsets, write_depth_log, write_geotags,
    write_offsets, DepthSample, GeoTagRecord, MeshFormat, OffsetRecord,
};
use lakemesh::mesh::{Frame, TriMesh};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e7f64..1e7,
        Just(0.0),
        Just(-0.0),
        Just(1e-300),
        Just(754985.5010048617),
        Just(f64::MAX / 4.0),
    ]
}

fn frame() -> impl Strategy<Value = Frame> {
    prop_oneof![
        Just(Frame::Local),
        Just(Frame::Wgs84),
        (1u8..=60, any::<bool>()).prop_map(|(zone, north)| Frame::Utm { zone, north }),
    ]
}

fn mesh() -> impl Strategy<Value = TriMesh> {
    (4usize..40, frame()).prop_flat_map(|(n, frame)| {
        let verts = prop::collection::vec([coord(), coord(), coord()], n);
        let faces = prop::collection::vec(
            (0..n as u32, 0..n as u32, 0..n as u32).prop_filter("distinct", |(a, b, c)| a != b && b != c && a != c),
            1..60,
        );
        (verts, faces).prop_map(move |(v, f)| TriMesh {
            vertices: v,
            faces: f.into_iter().map(|(a, b, c)| [a, b, c]).collect(),
            frame,
        })
    })
}

proptest! {
    #[test]
    fn mesh_round_trips_in_every_format(m in mesh()) {
        for fmt in [MeshFormat::PlyAscii, MeshFormat::PlyBinaryLe, MeshFormat::Obj] {
            let back = decode_mesh(&encode_mesh(&m, fmt).unwrap(), fmt).unwrap();
            prop_assert_eq!(back.faces.clone(), m.faces.clone());
            prop_assert_eq!(back.frame, m.frame);
            for (a, b) in back.vertices.iter().zip(&m.vertices) {
                for k in 0..3 {
                    prop_assert_eq!(a[k].to_bits() == b[k].to_bits() || a[k] == b[k], true);
                }
            }
        }
    }

    #[test]
    fn depth_log_round_trip(
        rows in prop::collection::vec((-90.0f64..90.0, -180.0f64..180.0, 0.0f64..100.0, prop::option::of(0.0f64..2e9)), 1..50)
    ) {
        let samples: Vec<DepthSample> = rows
            .iter()
            .map(|&(lat, lon, depth, timestamp)| DepthSample { lat, lon, depth, timestamp })
            .collect();
        let (back, rep) = parse_depth_log(write_depth_log(&samples, Some("header")).as_bytes()).unwrap();
        prop_assert_eq!(rep.skipped_count(), 0);
        prop_assert_eq!(back, samples);
    }

    #[test]
    fn geotag_round_trip(rows in prop::collection::vec((-90.0f64..90.0, -180.0f64..180.0, -10.0f64..500.0, any::<bool>()), 1..30)) {
        let recs: Vec<GeoTagRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, &(lat, lon, alt, missing))| GeoTagRecord {
                image_id: format!("IMG_{i}"),
                lat: if missing { f64::NAN } else { lat },
                lon: if missing { f64::NAN } else { lon },
                alt: if missing { f64::NAN } else { alt },
                timestamp: Some(i as f64),
                missing,
            })
            .collect();
        let back = parse_geotags(write_geotags(&recs).as_bytes()).unwrap();
        prop_assert_eq!(back.len(), recs.len());
        for (a, b) in back.iter().zip(&recs) {
            prop_assert_eq!(a.missing, b.missing);
            prop_assert_eq!(&a.image_id, &b.image_id);
            if !b.missing {
                prop_assert_eq!((a.lat, a.lon, a.alt), (b.lat, b.lon, b.alt));
            }
        }
    }

    #[test]
    fn offsets_round_trip(e in -1e7f64..1e7, n in -1e7f64..1e7, z in -1e4f64..1e4) {
        let o = OffsetRecord { offset_e: e, offset_n: n, offset_z: z };
        prop_assert_eq!(parse_offsets(write_offsets(&o).as_bytes()).unwrap(), o);
    }
}

#[test]
fn mutated_inputs_never_panic() {
    let crashes = common::fuzz(600, 11);
    assert!(crashes.is_empty(), "{} crashes, first: {:?}", crashes.len(), crashes.first());
}
