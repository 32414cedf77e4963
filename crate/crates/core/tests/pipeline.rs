mod common;

use std::fs;
use std::path::Path;

use lakemesh::config::PipelineConfig;
use lakemesh::ingest::{read_mesh, MeshFormat};
use lakemesh::mesh::{Frame, TriMesh};
use lakemesh::meshops::{georeference, repair, watertight_check};
use lakemesh::pipeline::{bank_repair_options, run_pipeline};
use lakemesh::survey_sim::{simulate_survey, Bathymetry, BankSpec, SynthLakeSpec};

fn small_lake(seed: u64) -> SynthLakeSpec {
    SynthLakeSpec {
        bathymetry: Bathymetry::Paraboloid { radius: 24.0, depth: 2.5 },
        banks: vec![
            BankSpec { first_edge: 0, last_edge: 7, slope: 0.5, height: 2.0 },
            BankSpec { first_edge: 7, last_edge: 16, slope: 0.6, height: 2.5 },
        ],
        samples: 600,
        lane_spacing: 3.0,
        seed,
        ..SynthLakeSpec::default()
    }
}

fn cfg() -> PipelineConfig {
    PipelineConfig::default()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn bank_repair_removes_exactly_the_labelled_artifacts() {
    let c = PipelineConfig::default();
    for seed in [1, 2, 3] {
        let sim = simulate_survey(&SynthLakeSpec { samples: 200, seed, ..SynthLakeSpec::default() }).unwrap();
        for ((mesh, off), placement) in sim.banks.iter().zip(&sim.manifest.banks) {
            let g = georeference(mesh, off, Frame::Utm { zone: 14, north: true }).unwrap();
            let (out, _) = repair(&g, &bank_repair_options(&c)).unwrap();
            let removed = common::removed_faces(&g, &out);
            let labels = placement.artifacts.all();
            assert!(!labels.is_empty());
            assert_eq!(common::precision_recall(&removed, &labels), (1.0, 1.0), "seed {seed} {}", placement.file);
        }
    }
}

#[test]
fn clean_banks_lose_nothing() {
    let sim = simulate_survey(&SynthLakeSpec { samples: 200, artifacts: false, ..SynthLakeSpec::default() }).unwrap();
    for (mesh, off) in &sim.banks {
        let g = georeference(mesh, off, Frame::Utm { zone: 14, north: true }).unwrap();
        let (out, _) = repair(&g, &bank_repair_options(&PipelineConfig::default())).unwrap();
        assert_eq!(out.face_count(), g.face_count());
    }
}

#[test]
fn plane_gap_measured_and_bridged() {
    let s = 0.5;
    for gap in [1.0, 1.5, 2.0, 3.0] {
        for shift in [0.0, 0.13, 0.37] {
            for (bed_z, dip) in [(-1.0, 0.2), (-3.0, 0.3), (-0.5, 1.0)] {
                let (bed, bank) = common::plane_and_bank(gap, bed_z, dip, shift);
                let toe: Vec<_> = bank.vertices.iter().filter(|v| v[2] == 0.0).copied().collect();
                let gaps = common::toe_gaps(&bed, &toe, s);
                assert!(gaps.iter().all(|d| (d - gap).abs() <= s + 1e-9), "gap {gap}: {gaps:?}");
                let r = (gap / (2.0 * s)).ceil() as usize;
                let (before, after) = common::bridging(&bed, &[bank], s, r);
                if gap > 2.0 * s {
                    assert!(!before, "gap {gap} shift {shift} bed {bed_z}");
                }
                assert!(after, "gap {gap} shift {shift} bed {bed_z}");
            }
        }
    }
}

#[test]
fn diagonal_gap_needs_wider_closing() {
    // The 6-connected element measures gaps in L1, so a gap running at 45°
    // to the lattice is up to √2 wider in voxel steps.
    let s = 0.5;
    for gap in [1.0, 2.0] {
        for shift in [0.0, 0.21] {
            let (bed, bank) = common::plane_and_bank(gap, -1.0, 0.2, shift);
            let rot = |m: TriMesh| common::rotated_z(&m, std::f64::consts::FRAC_PI_4);
            let r = (std::f64::consts::SQRT_2 * gap / (2.0 * s)).ceil() as usize;
            assert_eq!(common::bridging(&rot(bed), &[rot(bank)], s, r), (false, true), "gap {gap} shift {shift}");
        }
    }
}

#[test]
fn small_lake_end_to_end() {
    let sim = simulate_survey(&small_lake(5)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let c = cfg();
    let rep = run_pipeline(&c, sim.depth_log.as_bytes(), &sim.banks, dir.path()).unwrap();
    assert!(rep.watertight.closed);
    let v0 = *rep.curve.capacities.last().unwrap();
    let want = sim.manifest.analytic_capacity;
    assert!((v0 - want).abs() / want < 0.05, "{v0} vs {want}");

    let bed = read_mesh(&dir.path().join("bed.ply"), MeshFormat::PlyAscii).unwrap();
    let mut toe = Vec::new();
    for i in 0..sim.banks.len() {
        let b = read_mesh(&dir.path().join(format!("bank_{i}_repaired.ply")), MeshFormat::PlyAscii).unwrap();
        toe.extend(b.vertices.iter().filter(|v| v[2] == c.waterline_z).copied());
    }
    let gap = common::median(&common::toe_gaps(&bed, &toe, c.voxel_spacing));
    assert!((gap - sim.manifest.gap).abs() <= c.voxel_spacing, "gap {gap}");

    let banks: Vec<TriMesh> = (0..sim.banks.len())
        .map(|i| read_mesh(&dir.path().join(format!("bank_{i}_repaired.ply")), MeshFormat::PlyAscii).unwrap())
        .collect();
    let r = (sim.manifest.gap / (2.0 * c.voxel_spacing)).ceil() as usize;
    assert_eq!(common::bridging(&bed, &banks, c.voxel_spacing, r), (false, true));
}

#[test]
fn pipeline_output_is_reproducible_across_runs_and_threads() {
    let sim = simulate_survey(&small_lake(9)).unwrap();
    let run = |threads: usize| {
        let dir = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_pipeline(&cfg(), sim.depth_log.as_bytes(), &sim.banks, dir.path())).unwrap();
        dir_contents(dir.path())
    };
    let a = run(1);
    assert!(a.len() >= 10);
    assert!(a == run(1));
    assert!(a == run(4));
}

#[test]
fn simulation_is_reproducible() {
    let a = simulate_survey(&small_lake(3)).unwrap();
    let b = simulate_survey(&small_lake(3)).unwrap();
    assert_eq!(a.depth_log, b.depth_log);
    assert_eq!(a.manifest.to_text(), b.manifest.to_text());
    let c = simulate_survey(&small_lake(4)).unwrap();
    assert_ne!(a.depth_log, c.depth_log);
}

#[test]
fn merged_lake_is_open_until_closed() {
    let sim = simulate_survey(&small_lake(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&cfg(), sim.depth_log.as_bytes(), &sim.banks, dir.path()).unwrap();
    let read = |n: &str| -> TriMesh { read_mesh(&dir.path().join(n), MeshFormat::PlyAscii).unwrap() };
    assert!(!watertight_check(&read("merged.ply")).closed);
    assert!(watertight_check(&read("closed.ply")).closed);
}
