//! Command line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::ingest::{parse_offsets, read_mesh_auto, write_mesh, MeshFormat, OffsetRecord};
use crate::mesh::{Frame, TriMesh};
use crate::meshops::{export_wgs84, georeference, merge, repair, RepairOptions};
use crate::pipeline::{
    bank_repair_options, close_mesh, depth_map, encode_cloud, footprint, ingest_log, read_cloud, reconstruct_bed,
    run_pipeline, volume_curve,
};
use crate::survey_sim::{simulate_survey, SynthLakeSpec};

#[derive(Debug, Parser)]
#[command(name = "lakemesh", version, about = "Lake bed and bank meshes to a closed lake model and its stage-storage curve")]
pub struct Cli {
    /// Config file; defaults to $LAKEMESH_CONFIG, then built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Outputs never depend on thread count; kept for scripts that pass it.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// More logging (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutArg {
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a depth log into a deduplicated UTM point cloud (PLY).
    Ingest {
        log: PathBuf,
        #[command(flatten)]
        out: OutArg,
        #[arg(long)]
        waterline: Option<f64>,
        #[arg(long)]
        zone: Option<u8>,
    },
    /// Grid the cloud's elevations as an ESRI ASCII grid.
    Depthmap {
        cloud: PathBuf,
        #[command(flatten)]
        out: OutArg,
        #[arg(long)]
        spacing: Option<f64>,
    },
    /// Poisson reconstruction of the bed from a cloud.
    Reconstruct {
        cloud: PathBuf,
        #[command(flatten)]
        out: OutArg,
        #[arg(long)]
        grid_spacing: Option<f64>,
    },
    /// Remove artifact faces; prints a report.
    Repair {
        mesh: PathBuf,
        #[command(flatten)]
        out: OutArg,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        clip_below: Option<f64>,
        /// Trim to the convex hull of this cloud.
        #[arg(long)]
        footprint: Option<PathBuf>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        largest_component: bool,
        /// Bank preset: long edges, clip at the waterline, largest component.
        #[arg(long, conflicts_with_all = ["alpha", "clip_below", "footprint", "largest_component"])]
        bank: bool,
    },
    /// Place a local mesh in UTM using an offset file.
    Georef {
        mesh: PathBuf,
        offsets: PathBuf,
        /// UTM zone with hemisphere, e.g. 14N.
        #[arg(long)]
        zone: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Concatenate meshes and weld coincident vertices.
    Merge {
        #[arg(required = true)]
        meshes: Vec<PathBuf>,
        #[arg(long)]
        weld: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Voxelize, close gaps, optionally fill the basin, and wrap.
    Close {
        mesh: PathBuf,
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        radius: Option<usize>,
        /// Fill the basin below this height and wrap the water body.
        #[arg(long)]
        lid: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Stage-storage curve of a closed mesh as CSV on standard output.
    Volume {
        mesh: PathBuf,
        /// Levels relative to the lid, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        levels: Option<Vec<f64>>,
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        lid: Option<f64>,
    },
    /// Generate a synthetic survey from a spec file.
    Simulate {
        spec: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run every stage, writing all intermediates into the output directory.
    Pipeline {
        config: PathBuf,
        log: PathBuf,
        /// Bank meshes; each needs a sibling `<stem>.offset` file.
        banks: Vec<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Convert a UTM mesh to longitude, latitude, height.
    #[command(name = "export-wgs84")]
    ExportWgs84 {
        mesh: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

fn out_format(path: &Path) -> MeshFormat {
    MeshFormat::from_path(path).unwrap_or(MeshFormat::PlyAscii)
}

fn save(mesh: &TriMesh, path: &Path) -> Result<()> {
    write_mesh(mesh, path, out_format(path))?;
    Ok(())
}

fn read_offsets(path: &Path) -> Result<OffsetRecord> {
    parse_offsets(&fs::read(path)?)
}

/// Offset file next to a bank mesh: same stem, `.offset` extension.
pub fn offset_path(mesh: &Path) -> PathBuf {
    mesh.with_extension("offset")
}

fn parse_zone(s: &str) -> Result<Frame> {
    let t = s.trim();
    let t = t.strip_prefix("utm/").unwrap_or(t);
    let frame: Frame = format!("utm/{t}").parse()?;
    Ok(frame)
}

pub fn run(cli: Cli, stdout: &mut impl Write) -> Result<()> {
    let mut cfg = match &cli.command {
        Command::Pipeline { config, .. } => PipelineConfig::load(config)?,
        _ => PipelineConfig::load_or_default(cli.config.as_deref())?,
    };
    match cli.command {
        Command::Ingest { log, out, waterline, zone } => {
            if let Some(w) = waterline {
                cfg.waterline_z = w;
            }
            if zone.is_some() {
                cfg.utm_zone = zone;
            }
            cfg.validate()?;
            let ing = ingest_log(&fs::read(&log)?, &cfg)?;
            fs::write(&out.out, encode_cloud(&ing.cloud))?;
            writeln!(stdout, "samples {}", ing.samples)?;
            writeln!(stdout, "skipped_lines {}", ing.report.skipped_count())?;
            for (line, reason) in &ing.report.skipped {
                writeln!(stdout, "skipped line {line}: {reason}")?;
            }
            writeln!(stdout, "points {}", ing.cloud.len())?;
            writeln!(stdout, "frame {}", ing.cloud.frame)?;
            writeln!(stdout, "hull_centroid {} {}", ing.centroid[0], ing.centroid[1])?;
        }
        Command::Depthmap { cloud, out, spacing } => {
            if let Some(s) = spacing {
                cfg.depthmap_spacing = s;
            }
            cfg.validate()?;
            fs::write(&out.out, depth_map(&read_cloud(&cloud)?, &cfg)?)?;
        }
        Command::Reconstruct { cloud, out, grid_spacing } => {
            if grid_spacing.is_some() {
                cfg.grid_spacing = grid_spacing;
            }
            cfg.validate()?;
            let (mesh, rep) = reconstruct_bed(&read_cloud(&cloud)?, &cfg)?;
            save(&mesh, &out.out)?;
            writeln!(stdout, "faces {}", mesh.face_count())?;
            writeln!(stdout, "cg_iterations {}", rep.iterations)?;
            writeln!(stdout, "cg_residual {:e}", rep.residual)?;
        }
        Command::Repair { mesh, out, alpha, clip_below, footprint: fp, margin, largest_component, bank } => {
            let opts = if bank {
                bank_repair_options(&cfg)
            } else {
                let footprint = match fp {
                    Some(p) => Some((footprint(&read_cloud(&p)?)?, margin.unwrap_or(cfg.footprint_margin))),
                    None => None,
                };
                RepairOptions { alpha, clip_below, footprint, largest_component }
            };
            let (m, r) = repair(&read_mesh_auto(&mesh)?, &opts)?;
            save(&m, &out.out)?;
            writeln!(stdout, "faces_removed_long_edge {}", r.faces_removed_long_edge)?;
            writeln!(stdout, "faces_clipped {}", r.faces_clipped)?;
            writeln!(stdout, "vertices_clipped {}", r.vertices_clipped)?;
            writeln!(stdout, "faces_removed_footprint {}", r.faces_removed_footprint)?;
            writeln!(stdout, "components_removed {}", r.components_removed)?;
            writeln!(stdout, "faces_remaining {}", m.face_count())?;
        }
        Command::Georef { mesh, offsets, zone, out } => {
            let g = georeference(&read_mesh_auto(&mesh)?, &read_offsets(&offsets)?, parse_zone(&zone)?)?;
            save(&g, &out.out)?;
        }
        Command::Merge { meshes, weld, out } => {
            let parts = meshes.iter().map(|p| read_mesh_auto(p)).collect::<Result<Vec<_>>>()?;
            let (m, r) = merge(&parts, weld.unwrap_or(cfg.weld_tolerance))?;
            save(&m, &out.out)?;
            writeln!(stdout, "vertices_welded {}", r.vertices_welded)?;
            writeln!(stdout, "faces_collapsed {}", r.faces_collapsed)?;
        }
        Command::Close { mesh, spacing, radius, lid, out } => {
            let (m, r) = close_mesh(
                &read_mesh_auto(&mesh)?,
                spacing.unwrap_or(cfg.voxel_spacing),
                radius.unwrap_or(cfg.close_radius),
                lid,
            )?;
            save(&m, &out.out)?;
            writeln!(stdout, "shell_voxels {}", r.shell_voxels)?;
            writeln!(stdout, "closed_voxels {}", r.closed_voxels)?;
            if let Some(w) = r.water_voxels {
                writeln!(stdout, "water_voxels {w}")?;
            }
        }
        Command::Volume { mesh, levels, spacing, lid } => {
            if levels.is_some() {
                cfg.levels = levels;
            }
            if let Some(s) = spacing {
                cfg.capacity_spacing = s;
            }
            if lid.is_some() {
                cfg.lid_z = lid;
            }
            cfg.validate()?;
            let curve = volume_curve(&read_mesh_auto(&mesh)?, &cfg)?;
            write!(stdout, "{}", curve.to_csv())?;
        }
        Command::Simulate { spec, out } => {
            let spec = SynthLakeSpec::parse(&fs::read_to_string(&spec)?)?;
            let sim = simulate_survey(&spec)?;
            let written = sim.write_to_dir(&out.out)?;
            let pcfg = PipelineConfig { waterline_z: spec.waterline_z, ..cfg };
            fs::write(out.out.join("pipeline.cfg"), pcfg.to_string())?;
            for p in written {
                writeln!(stdout, "{}", p.display())?;
            }
            writeln!(stdout, "{}", out.out.join("pipeline.cfg").display())?;
        }
        Command::Pipeline { log, banks, out, .. } => {
            let mut parts = Vec::new();
            for b in &banks {
                parts.push((read_mesh_auto(b)?, read_offsets(&offset_path(b))?));
            }
            let report = run_pipeline(&cfg, &fs::read(&log)?, &parts, &out.out)?;
            write!(stdout, "{}", report.to_text())?;
        }
        Command::ExportWgs84 { mesh, out } => {
            save(&export_wgs84(&read_mesh_auto(&mesh)?)?, &out.out)?;
        }
    }
    Ok(())
}

fn init(cli: &Cli) {
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init(&cli);
    let mut out = std::io::stdout().lock();
    match run(cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lakemesh: error class={}: {e}", e.class());
            e.exit_code()
        }
    }
}
