//! Synthetic lake surveys with analytic ground truth.
//!
//! A survey is a pure function of its [`SynthLakeSpec`]: the random stream is
//! ChaCha8 seeded from `seed`, and draws happen in a fixed order (per sample:
//! two GPS jitter normals, one depth noise normal, one dropout uniform; then
//! corrupt-line positions; then per-bank artifact draws).

mod path;
mod shapes;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, ParseError, ParseErrorKind, Position, Result};
use crate::geodesy::{utm_to_wgs84, Hemisphere, UtmCoord};
use crate::ingest::{encode_mesh, write_depth_log, write_geotags, write_offsets, DepthSample, GeoTagRecord, MeshFormat, OffsetRecord};
use crate::mesh::TriMesh;
use crate::pointcloud::{Point2, Polygon2D};

pub use path::{boustrophedon_path, distance_to_path, path_length, sample_along};
pub use shapes::{
    append_mesh, bank_strip, box_mesh, floating_patch, inject_long_edges, inset_polygon, offset_vertex,
    paraboloid_capacity, paraboloid_lake_mesh, reflection_patch, regular_polygon, ArtifactLabels, BankGeometry,
};

/// Seconds since the epoch of the first logged sample.
const T0: f64 = 1_600_000_000.0;
const BANK_CELL: f64 = 1.0;
const GEOTAG_STEP: f64 = 5.0;
const CAMERA_ALTITUDE: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bathymetry {
    /// `d0 (1 - r²/R²)` inside radius `R`.
    Paraboloid { radius: f64, depth: f64 },
    /// `d0 exp(-r² / 2σ²)`.
    Gaussian { sigma: f64, depth: f64 },
    Plane { depth: f64 },
}

impl Bathymetry {
    /// Depth below the waterline at local position `(x, y)`, never negative.
    pub fn depth_at(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        match *self {
            Bathymetry::Paraboloid { radius, depth } => (depth * (1.0 - r2 / (radius * radius))).max(0.0),
            Bathymetry::Gaussian { sigma, depth } => depth * (-r2 / (2.0 * sigma * sigma)).exp(),
            Bathymetry::Plane { depth } => depth,
        }
    }

    fn support_radius(&self) -> Option<f64> {
        match *self {
            Bathymetry::Paraboloid { radius, .. } => Some(radius),
            Bathymetry::Gaussian { sigma, .. } => Some(3.0 * sigma),
            Bathymetry::Plane { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Bathymetry::Paraboloid { radius, depth } => radius > 0.0 && depth > 0.0,
            Bathymetry::Gaussian { sigma, depth } => sigma > 0.0 && depth > 0.0,
            Bathymetry::Plane { depth } => depth > 0.0,
        };
        let finite = match *self {
            Bathymetry::Paraboloid { radius: a, depth: b } | Bathymetry::Gaussian { sigma: a, depth: b } => {
                a.is_finite() && b.is_finite()
            }
            Bathymetry::Plane { depth } => depth.is_finite(),
        };
        if ok && finite {
            Ok(())
        } else {
            Err(Error::Parameter(format!("bathymetry parameters must be positive: {self}")))
        }
    }

    /// Closed-form capacity at the waterline. The plane bed is bounded by `shore`;
    /// the others by their own support (the Gaussian over the whole plane).
    pub fn analytic_capacity(&self, shore: &Polygon2D) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Bathymetry::Paraboloid { radius, depth } => 0.5 * PI * radius * radius * depth,
            Bathymetry::Gaussian { sigma, depth } => 2.0 * PI * sigma * sigma * depth,
            Bathymetry::Plane { depth } => depth * shore.area(),
        }
    }
}

impl fmt::Display for Bathymetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bathymetry::Paraboloid { radius, depth } => write!(f, "paraboloid {radius} {depth}"),
            Bathymetry::Gaussian { sigma, depth } => write!(f, "gaussian {sigma} {depth}"),
            Bathymetry::Plane { depth } => write!(f, "plane {depth}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankSpec {
    /// Edges `first_edge..last_edge` of the survey polygon.
    pub first_edge: usize,
    pub last_edge: usize,
    pub slope: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthLakeSpec {
    pub bathymetry: Bathymetry,
    pub center: UtmCoord,
    /// Circumradius of the default regular shore polygon; defaults to the
    /// bathymetry's support radius.
    pub radius: Option<f64>,
    pub polygon_sides: usize,
    /// Survey polygon in local coordinates; replaces the default when set.
    pub polygon: Option<Polygon2D>,
    pub banks: Vec<BankSpec>,
    /// Horizontal standoff between the survey polygon and each bank toe.
    pub gap: f64,
    pub samples: usize,
    pub lane_spacing: f64,
    pub depth_noise: f64,
    pub gps_noise: f64,
    pub seed: u64,
    pub waterline_z: f64,
    pub artifacts: bool,
    /// Probability that a sample in the first section is not logged.
    pub section_dropout: f64,
    pub corrupt_lines: usize,
}

impl Default for SynthLakeSpec {
    /// A paraboloid pond of about 18,600 m² with three banks.
    fn default() -> Self {
        SynthLakeSpec {
            bathymetry: Bathymetry::Paraboloid { radius: 77.0, depth: 4.0 },
            center: UtmCoord { easting: 754985.5, northing: 3390505.75, zone: 14, hemisphere: Hemisphere::North },
            radius: None,
            polygon_sides: 16,
            polygon: None,
            banks: vec![
                BankSpec { first_edge: 0, last_edge: 6, slope: 0.5, height: 3.0 },
                BankSpec { first_edge: 6, last_edge: 11, slope: 0.4, height: 2.5 },
                BankSpec { first_edge: 11, last_edge: 16, slope: 0.6, height: 3.5 },
            ],
            gap: 2.0,
            samples: 3000,
            lane_spacing: 5.0,
            depth_noise: 0.05,
            gps_noise: 0.02,
            seed: 1,
            waterline_z: 0.0,
            artifacts: true,
            section_dropout: 0.0,
            corrupt_lines: 0,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be non-negative, got {v}")))
    }
}

impl SynthLakeSpec {
    /// Shore polygon the default survey polygon is inset from.
    fn shore_radius(&self) -> Result<f64> {
        self.radius
            .or_else(|| self.bathymetry.support_radius())
            .ok_or_else(|| Error::Parameter("plane bathymetry needs a radius or an explicit polygon".into()))
    }

    /// Local-frame polygon the vessel covers.
    pub fn survey_polygon(&self) -> Result<Polygon2D> {
        match &self.polygon {
            Some(p) => Ok(p.clone()),
            None => inset_polygon(&regular_polygon(self.polygon_sides, self.shore_radius()?)?, self.gap),
        }
    }

    /// The survey polygon moved outward by the gap: the bank toe line.
    pub fn shore_polygon(&self) -> Result<Polygon2D> {
        let p = self.survey_polygon()?;
        Polygon2D::new((0..p.len()).map(|i| offset_vertex(&p, i, self.gap)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.bathymetry.validate()?;
        self.center.validate()?;
        positive("gap", self.gap)?;
        positive("lane spacing", self.lane_spacing)?;
        non_negative("depth noise", self.depth_noise)?;
        non_negative("GPS noise", self.gps_noise)?;
        if let Some(r) = self.radius {
            positive("radius", r)?;
        }
        if !(0.0..=1.0).contains(&self.section_dropout) {
            return Err(Error::Parameter(format!("section dropout {} outside [0, 1]", self.section_dropout)));
        }
        if self.samples == 0 {
            return Err(Error::Parameter("at least one sample is required".into()));
        }
        if self.polygon.is_none() && self.polygon_sides < 3 {
            return Err(Error::Parameter("polygon needs at least 3 sides".into()));
        }
        let poly = self.survey_polygon()?;
        if let Some(r) = self.bathymetry.support_radius().filter(|_| matches!(self.bathymetry, Bathymetry::Paraboloid { .. })) {
            if poly.vertices().iter().any(|v| v[0].hypot(v[1]) >= r) {
                return Err(Error::Parameter(format!("survey polygon leaves the bathymetry support (radius {r})")));
            }
        }
        let n = poly.len();
        let mut used = vec![false; n];
        for (i, b) in self.banks.iter().enumerate() {
            positive("bank slope", b.slope)?;
            positive("bank height", b.height)?;
            if b.first_edge >= b.last_edge || b.last_edge > n {
                return Err(Error::Parameter(format!(
                    "bank #{i} edges {}..{} invalid for a {n}-sided polygon",
                    b.first_edge, b.last_edge
                )));
            }
            for e in b.first_edge..b.last_edge {
                if std::mem::replace(&mut used[e], true) {
                    return Err(Error::Parameter(format!("bank #{i} overlaps another bank on edge {e}")));
                }
            }
        }
        Ok(())
    }

    /// Parses the `key = value` text format written by [`fmt::Display`].
    /// Unlisted keys keep their defaults; `bank` lines replace the default banks.
    pub fn parse(text: &str) -> Result<SynthLakeSpec> {
        let mut spec = SynthLakeSpec::default();
        let mut banks = Vec::new();
        let mut saw_bank = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| -> Error {
                ParseError::new(ParseErrorKind::InvalidRecord, Position::Line(i + 1), msg).into()
            };
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let words: Vec<&str> = value.split_whitespace().collect();
            let nums = |count: usize| -> Result<Vec<f64>> {
                let v: Vec<f64> = words[words.len().min(1)..]
                    .iter()
                    .map(|w| w.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(format!("bad number in {key}")))?;
                if v.len() != count {
                    return Err(bad(format!("{key} expects {count} numbers")));
                }
                Ok(v)
            };
            let num = || value.parse::<f64>().map_err(|_| bad(format!("bad number for {key}: {value:?}")));
            let int = || value.parse::<u64>().map_err(|_| bad(format!("bad integer for {key}: {value:?}")));
            match key {
                "bathymetry" => {
                    spec.bathymetry = match words.first().copied() {
                        Some("paraboloid") => {
                            let v = nums(2)?;
                            Bathymetry::Paraboloid { radius: v[0], depth: v[1] }
                        }
                        Some("gaussian") => {
                            let v = nums(2)?;
                            Bathymetry::Gaussian { sigma: v[0], depth: v[1] }
                        }
                        Some("plane") => Bathymetry::Plane { depth: nums(1)?[0] },
                        _ => return Err(bad(format!("unknown bathymetry {value:?}"))),
                    }
                }
                "center_utm" => {
                    if words.len() != 3 {
                        return Err(bad("center_utm expects easting northing zone (e.g. 14N)".into()));
                    }
                    let e = words[0].parse::<f64>().map_err(|_| bad("bad easting".into()))?;
                    let n = words[1].parse::<f64>().map_err(|_| bad("bad northing".into()))?;
                    let z = words[2];
                    let (digits, hemi) = z.split_at(z.len().saturating_sub(1));
                    let hemisphere = match hemi {
                        "N" | "n" => Hemisphere::North,
                        "S" | "s" => Hemisphere::South,
                        _ => return Err(bad(format!("zone {z:?} needs an N or S suffix"))),
                    };
                    let zone = digits.parse::<u8>().map_err(|_| bad(format!("bad zone {z:?}")))?;
                    spec.center = UtmCoord { easting: e, northing: n, zone, hemisphere };
                }
                "radius" => spec.radius = Some(num()?),
                "polygon_sides" => spec.polygon_sides = int()? as usize,
                "polygon" => {
                    let v: Vec<f64> = words
                        .iter()
                        .map(|w| w.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("bad polygon coordinate".into()))?;
                    if v.len() % 2 != 0 {
                        return Err(bad("polygon needs x y pairs".into()));
                    }
                    let pts: Vec<Point2> = v.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
                    spec.polygon = Some(Polygon2D::new_any_orientation(pts)?);
                }
                "bank" => {
                    saw_bank = true;
                    if words.len() != 4 {
                        return Err(bad("bank expects first_edge last_edge slope height".into()));
                    }
                    let e0 = words[0].parse::<usize>().map_err(|_| bad("bad bank edge".into()))?;
                    let e1 = words[1].parse::<usize>().map_err(|_| bad("bad bank edge".into()))?;
                    let s = words[2].parse::<f64>().map_err(|_| bad("bad bank slope".into()))?;
                    let h = words[3].parse::<f64>().map_err(|_| bad("bad bank height".into()))?;
                    banks.push(BankSpec { first_edge: e0, last_edge: e1, slope: s, height: h });
                }
                "gap" => spec.gap = num()?,
                "samples" => spec.samples = int()? as usize,
                "lane_spacing" => spec.lane_spacing = num()?,
                "depth_noise" => spec.depth_noise = num()?,
                "gps_noise" => spec.gps_noise = num()?,
                "seed" => spec.seed = int()?,
                "waterline_z" => spec.waterline_z = num()?,
                "artifacts" => {
                    spec.artifacts = value.parse::<bool>().map_err(|_| bad(format!("artifacts must be true or false, got {value:?}")))?
                }
                "section_dropout" => spec.section_dropout = num()?,
                "corrupt_lines" => spec.corrupt_lines = int()? as usize,
                _ => return Err(bad(format!("unknown key {key:?}"))),
            }
        }
        if saw_bank {
            spec.banks = banks;
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SynthLakeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bathymetry = {}", self.bathymetry)?;
        let hemi = if self.center.hemisphere.is_north() { 'N' } else { 'S' };
        writeln!(f, "center_utm = {} {} {}{}", self.center.easting, self.center.northing, self.center.zone, hemi)?;
        if let Some(r) = self.radius {
            writeln!(f, "radius = {r}")?;
        }
        match &self.polygon {
            Some(p) => {
                let coords: Vec<String> = p.vertices().iter().map(|v| format!("{} {}", v[0], v[1])).collect();
                writeln!(f, "polygon = {}", coords.join(" "))?;
            }
            None => writeln!(f, "polygon_sides = {}", self.polygon_sides)?,
        }
        for b in &self.banks {
            writeln!(f, "bank = {} {} {} {}", b.first_edge, b.last_edge, b.slope, b.height)?;
        }
        writeln!(f, "gap = {}", self.gap)?;
        writeln!(f, "samples = {}", self.samples)?;
        writeln!(f, "lane_spacing = {}", self.lane_spacing)?;
        writeln!(f, "depth_noise = {}", self.depth_noise)?;
        writeln!(f, "gps_noise = {}", self.gps_noise)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "waterline_z = {}", self.waterline_z)?;
        writeln!(f, "artifacts = {}", self.artifacts)?;
        writeln!(f, "section_dropout = {}", self.section_dropout)?;
        writeln!(f, "corrupt_lines = {}", self.corrupt_lines)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleTruth {
    /// Jitter-free local position.
    pub position: Point2,
    pub depth: f64,
    pub section: usize,
    pub logged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BankPlacement {
    pub file: String,
    pub edges: (usize, usize),
    pub offset: OffsetRecord,
    pub faces: usize,
    pub artifacts: ArtifactLabels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyManifest {
    pub seed: u64,
    pub bathymetry: Bathymetry,
    pub center: UtmCoord,
    pub waterline_z: f64,
    pub gap: f64,
    pub lane_spacing: f64,
    pub depth_noise: f64,
    pub gps_noise: f64,
    pub analytic_capacity: f64,
    pub truth: Vec<SampleTruth>,
    pub corrupt_lines: Vec<usize>,
    pub banks: Vec<BankPlacement>,
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl SurveyManifest {
    pub fn logged_count(&self) -> usize {
        self.truth.iter().filter(|t| t.logged).count()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("lakemesh-survey-manifest 1\n");
        let hemi = if self.center.hemisphere.is_north() { 'N' } else { 'S' };
        s += &format!("seed = {}\n", self.seed);
        s += &format!("bathymetry = {}\n", self.bathymetry);
        s += &format!("center_utm = {} {} {}{}\n", self.center.easting, self.center.northing, self.center.zone, hemi);
        s += &format!("waterline_z = {}\n", self.waterline_z);
        s += &format!("gap = {}\n", self.gap);
        s += &format!("lane_spacing = {}\n", self.lane_spacing);
        s += &format!("depth_noise = {}\n", self.depth_noise);
        s += &format!("gps_noise = {}\n", self.gps_noise);
        s += &format!("analytic_capacity = {}\n", self.analytic_capacity);
        s += &format!("samples.planned = {}\n", self.truth.len());
        s += &format!("samples.logged = {}\n", self.logged_count());
        s += &format!("corrupt_lines = {}\n", join(&self.corrupt_lines));
        s += &format!("banks = {}\n", self.banks.len());
        for (i, b) in self.banks.iter().enumerate() {
            s += &format!("bank.{i}.file = {}\n", b.file);
            s += &format!("bank.{i}.edges = {} {}\n", b.edges.0, b.edges.1);
            s += &format!("bank.{i}.offset = {} {} {}\n", b.offset.offset_e, b.offset.offset_n, b.offset.offset_z);
            s += &format!("bank.{i}.faces = {}\n", b.faces);
            s += &format!("bank.{i}.artifacts.long_edge = {}\n", join(&b.artifacts.long_edge));
            s += &format!("bank.{i}.artifacts.reflection = {}\n", join(&b.artifacts.reflection));
            s += &format!("bank.{i}.artifacts.floating = {}\n", join(&b.artifacts.floating));
        }
        s += "truth index x y depth section logged\n";
        for (i, t) in self.truth.iter().enumerate() {
            s += &format!(
                "{i} {} {} {} {} {}\n",
                t.position[0], t.position[1], t.depth, t.section, t.logged as u8
            );
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct SurveyOutput {
    pub depth_log: String,
    pub geotags: String,
    /// Local-frame bank meshes, each with the offset that places it in UTM.
    pub banks: Vec<(TriMesh, OffsetRecord)>,
    pub manifest: SurveyManifest,
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let k = 10f64.powi(decimals);
    (v * k).round() / k
}

const CORRUPT: [&str; 4] = ["$GPGGA,garbage", "30.5,-96.3", "nan,nan,nan", "30.5,-96.3,-1.0"];

/// Runs a synthetic survey.
pub fn simulate_survey(spec: &SynthLakeSpec) -> Result<SurveyOutput> {
    spec.validate()?;
    let poly = spec.survey_polygon()?;
    let path = boustrophedon_path(&poly, spec.lane_spacing)?;
    let positions = sample_along(&path, spec.samples);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let zone_north = spec.center.hemisphere;

    let mut truth = Vec::with_capacity(spec.samples);
    let mut samples = Vec::with_capacity(spec.samples);
    let sections = 3;
    for (i, p) in positions.iter().enumerate() {
        let jx: f64 = rng.sample(StandardNormal);
        let jy: f64 = rng.sample(StandardNormal);
        let dn: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.gen();
        let section = i * sections / spec.samples;
        let depth = spec.bathymetry.depth_at(p[0], p[1]);
        let logged = !(section == 0 && u < spec.section_dropout);
        truth.push(SampleTruth { position: *p, depth, section, logged });
        if !logged {
            continue;
        }
        let utm = UtmCoord {
            easting: spec.center.easting + p[0] + spec.gps_noise * jx,
            northing: spec.center.northing + p[1] + spec.gps_noise * jy,
            zone: spec.center.zone,
            hemisphere: zone_north,
        };
        let geo = utm_to_wgs84(utm)?;
        samples.push(DepthSample {
            lat: round_to(geo.lat, 9),
            lon: round_to(geo.lon, 9),
            depth: round_to((depth + spec.depth_noise * dn).max(0.0), 3),
            timestamp: Some(T0 + i as f64),
        });
    }

    let header = format!("synthetic survey, seed {}, bathymetry {}", spec.seed, spec.bathymetry);
    let log = write_depth_log(&samples, Some(&header));
    let mut lines: Vec<String> = log.lines().map(str::to_string).collect();
    let mut corrupt_lines = Vec::new();
    for k in 0..spec.corrupt_lines {
        let at = rng.gen_range(1..=lines.len());
        lines.insert(at, CORRUPT[k % CORRUPT.len()].to_string());
        for c in corrupt_lines.iter_mut() {
            if *c >= at + 1 {
                *c += 1;
            }
        }
        corrupt_lines.push(at + 1);
    }
    corrupt_lines.sort_unstable();
    let mut depth_log = lines.join("\n");
    depth_log.push('\n');

    let mut banks = Vec::new();
    let mut placements = Vec::new();
    let mut geotags = Vec::new();
    for (i, b) in spec.banks.iter().enumerate() {
        let geom = BankGeometry {
            first_edge: b.first_edge,
            last_edge: b.last_edge,
            slope: b.slope,
            height: b.height,
            gap: spec.gap,
        };
        let strip = bank_strip(&poly, &geom, 0.0, BANK_CELL)?;
        let origin = offset_vertex(&poly, b.first_edge, spec.gap);
        let mut labels = ArtifactLabels::default();
        let mut mesh = strip.clone();
        if spec.artifacts {
            let median = crate::meshops::median_edge_length(&strip).unwrap_or(BANK_CELL);
            let (injected, at) = inject_long_edges(&strip, 6, 6.0 * median, &mut rng)?;
            mesh = injected;
            labels.long_edge = at;
            // Lowest row of cells along the first few meters of toe.
            let cols = strip.faces.len() / ((b.height / b.slope / BANK_CELL).ceil() as usize).max(1) / 2;
            let take = (2 * cols.min(12)).min(strip.faces.len());
            let src: Vec<usize> = (0..take).collect();
            labels.reflection = append_mesh(&mut mesh, &reflection_patch(&strip, &src, 0.0, 0.05));
            let mid = strip.vertices[strip.vertices.len() / 2];
            let jitter: f64 = rng.gen_range(0.0..1.0);
            let float = floating_patch([mid[0] + jitter, mid[1], b.height + 8.0], 0.5, 4);
            labels.floating = append_mesh(&mut mesh, &float);
        }
        let local = mesh.translated([-origin[0], -origin[1], 0.0]);
        let offset = OffsetRecord {
            offset_e: spec.center.easting + origin[0],
            offset_n: spec.center.northing + origin[1],
            offset_z: spec.waterline_z,
        };
        placements.push(BankPlacement {
            file: format!("bank_{i}.ply"),
            edges: (b.first_edge, b.last_edge),
            offset,
            faces: local.faces.len(),
            artifacts: labels,
        });
        banks.push((local, offset));

        // Photo positions along the outer crest of the bank.
        let width = b.height / b.slope;
        for e in b.first_edge..b.last_edge {
            let a = offset_vertex(&poly, e, spec.gap + width);
            let c = offset_vertex(&poly, e + 1, spec.gap + width);
            let m = (((c[0] - a[0]).hypot(c[1] - a[1]) / GEOTAG_STEP).ceil() as usize).max(1);
            for k in 0..m {
                let t = k as f64 / m as f64;
                let p = [a[0] + t * (c[0] - a[0]), a[1] + t * (c[1] - a[1])];
                let geo = utm_to_wgs84(UtmCoord {
                    easting: spec.center.easting + p[0],
                    northing: spec.center.northing + p[1],
                    zone: spec.center.zone,
                    hemisphere: zone_north,
                })?;
                geotags.push((geo, spec.waterline_z + b.height + CAMERA_ALTITUDE));
            }
        }
    }
    let first_section = geotags.len().div_ceil(sections);
    let records: Vec<GeoTagRecord> = geotags
        .iter()
        .enumerate()
        .map(|(k, (geo, alt))| {
            let missing = k < first_section && k % 2 == 1;
            GeoTagRecord {
                image_id: format!("IMG_{:04}", k + 1),
                lat: if missing { f64::NAN } else { round_to(geo.lat, 9) },
                lon: if missing { f64::NAN } else { round_to(geo.lon, 9) },
                alt: if missing { f64::NAN } else { *alt },
                timestamp: Some(T0 + spec.samples as f64 + k as f64),
                missing,
            }
        })
        .collect();

    let manifest = SurveyManifest {
        seed: spec.seed,
        bathymetry: spec.bathymetry,
        center: spec.center,
        waterline_z: spec.waterline_z,
        gap: spec.gap,
        lane_spacing: spec.lane_spacing,
        depth_noise: spec.depth_noise,
        gps_noise: spec.gps_noise,
        analytic_capacity: spec.bathymetry.analytic_capacity(&spec.shore_polygon()?),
        truth,
        corrupt_lines,
        banks: placements,
    };
    Ok(SurveyOutput { depth_log, geotags: write_geotags(&records), banks, manifest })
}

impl SurveyOutput {
    /// Writes `depth_log.txt`, `geotags.csv`, `bank_<i>.ply` with
    /// `bank_<i>.offset`, and `manifest.txt`. Returns the written paths.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
            let p = dir.join(name);
            fs::write(&p, bytes)?;
            written.push(p);
            Ok(())
        };
        put("depth_log.txt", self.depth_log.as_bytes())?;
        put("geotags.csv", self.geotags.as_bytes())?;
        for (i, (mesh, offset)) in self.banks.iter().enumerate() {
            put(&format!("bank_{i}.ply"), &encode_mesh(mesh, MeshFormat::PlyAscii)?)?;
            put(&format!("bank_{i}.offset"), write_offsets(offset).as_bytes())?;
        }
        put("manifest.txt", self.manifest.to_text().as_bytes())?;
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_depth_log;

    fn small() -> SynthLakeSpec {
        SynthLakeSpec {
            bathymetry: Bathymetry::Paraboloid { radius: 30.0, depth: 3.0 },
            banks: vec![BankSpec { first_edge: 0, last_edge: 5, slope: 0.5, height: 2.0 }],
            samples: 400,
            lane_spacing: 4.0,
            ..SynthLakeSpec::default()
        }
    }

    #[test]
    fn plane_without_noise_logs_exact_depth() {
        let spec = SynthLakeSpec {
            bathymetry: Bathymetry::Plane { depth: 2.0 },
            radius: Some(30.0),
            depth_noise: 0.0,
            ..small()
        };
        let out = simulate_survey(&spec).unwrap();
        let (samples, rep) = parse_depth_log(out.depth_log.as_bytes()).unwrap();
        assert_eq!(rep.skipped_count(), 0);
        assert_eq!(samples.len(), 400);
        assert!(samples.iter().all(|s| s.depth == 2.0));
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = simulate_survey(&small()).unwrap();
        let b = simulate_survey(&small()).unwrap();
        assert_eq!(a.depth_log, b.depth_log);
        assert_eq!(a.geotags, b.geotags);
        assert_eq!(a.manifest.to_text(), b.manifest.to_text());
        assert_eq!(a.banks, b.banks);
        let c = simulate_survey(&SynthLakeSpec { seed: 2, ..small() }).unwrap();
        assert_ne!(a.depth_log, c.depth_log);
    }

    #[test]
    fn mean_depth_matches_truth() {
        let spec = SynthLakeSpec { depth_noise: 0.2, samples: 2000, ..small() };
        let out = simulate_survey(&spec).unwrap();
        let (samples, _) = parse_depth_log(out.depth_log.as_bytes()).unwrap();
        let n = samples.len() as f64;
        let logged = samples.iter().map(|s| s.depth).sum::<f64>() / n;
        let truth = out.manifest.truth.iter().map(|t| t.depth).sum::<f64>() / n;
        assert!((logged - truth).abs() < 3.0 * 0.2 / n.sqrt(), "{logged} vs {truth}");
    }

    #[test]
    fn truth_is_analytic_depth_at_path_points() {
        let spec = small();
        let out = simulate_survey(&spec).unwrap();
        let poly = spec.survey_polygon().unwrap();
        let path = boustrophedon_path(&poly, spec.lane_spacing).unwrap();
        for t in &out.manifest.truth {
            assert_eq!(t.depth, spec.bathymetry.depth_at(t.position[0], t.position[1]));
            assert!(distance_to_path(t.position, &path) < 1e-9);
            assert!(poly.contains(t.position));
        }
    }

    #[test]
    fn dropout_and_corruption_are_recorded() {
        let spec = SynthLakeSpec { section_dropout: 0.5, corrupt_lines: 7, ..small() };
        let out = simulate_survey(&spec).unwrap();
        let (samples, rep) = parse_depth_log(out.depth_log.as_bytes()).unwrap();
        assert_eq!(samples.len(), out.manifest.logged_count());
        assert!(out.manifest.logged_count() < 400);
        assert!(out.manifest.truth.iter().filter(|t| !t.logged).all(|t| t.section == 0));
        assert_eq!(rep.skipped_count(), 7);
        let skipped: Vec<usize> = rep.skipped.iter().map(|s| s.0).collect();
        assert_eq!(skipped, out.manifest.corrupt_lines);
    }

    #[test]
    fn bank_toe_sits_at_the_gap() {
        let spec = SynthLakeSpec { artifacts: false, ..small() };
        let out = simulate_survey(&spec).unwrap();
        let poly = spec.survey_polygon().unwrap();
        let (mesh, off) = &out.banks[0];
        for v in &mesh.vertices {
            let p = [v[0] + off.offset_e - spec.center.easting, v[1] + off.offset_n - spec.center.northing];
            if v[2] == 0.0 {
                let d = -poly.signed_distance(p);
                assert!(d > spec.gap - 1e-6 && d < spec.gap / (std::f64::consts::PI / 16.0).cos() + 1e-6);
            } else {
                assert!(poly.signed_distance(p) < -spec.gap);
            }
        }
    }

    #[test]
    fn spec_text_round_trip() {
        let spec = SynthLakeSpec::default();
        assert_eq!(SynthLakeSpec::parse(&spec.to_string()).unwrap(), spec);
        let custom = SynthLakeSpec::parse(
            "bathymetry = plane 1.5\npolygon = 0 0 40 0 20 30\nbank = 0 2 0.5 2\nseed = 9 # comment\n",
        )
        .unwrap();
        assert_eq!(custom.banks.len(), 1);
        assert_eq!(custom.seed, 9);
        assert_eq!(SynthLakeSpec::parse(&custom.to_string()).unwrap(), custom);
        assert!(SynthLakeSpec::parse("gap = -1\n").is_err());
        assert!(SynthLakeSpec::parse("colour = red\n").is_err());
        assert!(SynthLakeSpec::parse("bank = 0 20 0.5 2\n").is_err());
        assert!(SynthLakeSpec::parse("bank = 0 4 0.5 2\nbank = 3 6 0.5 2\n").is_err());
    }

    #[test]
    fn default_pond_area() {
        let spec = SynthLakeSpec::default();
        let a = std::f64::consts::PI * 77.0 * 77.0;
        assert!((a - 18_580.0).abs() / 18_580.0 < 0.01);
        assert!(spec.validate().is_ok());
    }
}
