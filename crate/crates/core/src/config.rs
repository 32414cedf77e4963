//! Pipeline settings: a flat `key = value` file with `#` comments.

use std::fmt;
use std::path::Path;

use crate::error::{Error, ParseError, ParseErrorKind, Position, Result};
use crate::poisson::ReconstructionParams;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "LAKEMESH_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub waterline_z: f64,
    /// `None` picks the zone of the survey's centre.
    pub utm_zone: Option<u8>,
    /// Poisson grid spacing; `None` picks the bounding-box diagonal / 128.
    pub grid_spacing: Option<f64>,
    pub padding_cells: usize,
    pub splat_radius_cells: usize,
    pub cg_tolerance: f64,
    pub cg_max_iters: usize,
    pub normal_k: usize,
    pub dedupe_tolerance: f64,
    pub repair_alpha: f64,
    /// Extra margin around the survey hull kept when trimming the bed.
    pub footprint_margin: f64,
    pub weld_tolerance: f64,
    pub voxel_spacing: f64,
    pub close_radius: usize,
    /// Water surface used to fill the closed basin; defaults to the waterline.
    pub lid_z: Option<f64>,
    pub idw_power: f64,
    pub idw_radius: Option<f64>,
    pub depthmap_spacing: f64,
    pub capacity_spacing: f64,
    /// Stage levels relative to the lid. `None` steps from the lake floor up
    /// to the lid every `level_step` meters.
    pub levels: Option<Vec<f64>>,
    pub level_step: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            waterline_z: 0.0,
            utm_zone: None,
            grid_spacing: Some(0.5),
            padding_cells: 8,
            splat_radius_cells: 3,
            cg_tolerance: 1e-7,
            cg_max_iters: 20_000,
            normal_k: 8,
            dedupe_tolerance: 0.01,
            repair_alpha: 4.0,
            footprint_margin: 0.5,
            weld_tolerance: 1e-3,
            voxel_spacing: 0.5,
            close_radius: 2,
            lid_z: None,
            idw_power: 2.0,
            idw_radius: None,
            depthmap_spacing: 1.0,
            capacity_spacing: 0.25,
            levels: None,
            level_step: 0.5,
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}

fn pos(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl PipelineConfig {
    pub fn lid(&self) -> f64 {
        self.lid_z.unwrap_or(self.waterline_z)
    }

    pub fn reconstruction_params(&self) -> ReconstructionParams {
        ReconstructionParams {
            grid_spacing: self.grid_spacing,
            padding_cells: self.padding_cells,
            cg_tolerance: self.cg_tolerance,
            cg_max_iters: self.cg_max_iters,
            splat_radius_cells: self.splat_radius_cells,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check(self.waterline_z.is_finite(), || format!("waterline_z {} is not finite", self.waterline_z))?;
        if let Some(z) = self.utm_zone {
            check((1..=60).contains(&z), || format!("utm_zone {z} outside 1..=60"))?;
        }
        self.reconstruction_params().validate()?;
        check(self.normal_k >= 3, || format!("normal_k {} must be at least 3", self.normal_k))?;
        check(self.dedupe_tolerance >= 0.0 && self.dedupe_tolerance.is_finite(), || {
            format!("dedupe_tolerance {} must be non-negative", self.dedupe_tolerance)
        })?;
        check(self.repair_alpha > 1.0 && self.repair_alpha.is_finite(), || {
            format!("repair_alpha {} must exceed 1", self.repair_alpha)
        })?;
        check(self.footprint_margin >= 0.0 && self.footprint_margin.is_finite(), || {
            format!("footprint_margin {} must be non-negative", self.footprint_margin)
        })?;
        check(self.weld_tolerance >= 0.0 && self.weld_tolerance.is_finite(), || {
            format!("weld_tolerance {} must be non-negative", self.weld_tolerance)
        })?;
        check(pos(self.voxel_spacing), || format!("voxel_spacing {} must be positive", self.voxel_spacing))?;
        check(self.close_radius >= 1, || "close_radius must be at least 1".into())?;
        if let Some(z) = self.lid_z {
            check(z.is_finite(), || format!("lid_z {z} is not finite"))?;
        }
        check(pos(self.idw_power), || format!("idw_power {} must be positive", self.idw_power))?;
        if let Some(r) = self.idw_radius {
            check(pos(r), || format!("idw_radius {r} must be positive"))?;
        }
        check(pos(self.depthmap_spacing), || format!("depthmap_spacing {} must be positive", self.depthmap_spacing))?;
        check(pos(self.capacity_spacing), || format!("capacity_spacing {} must be positive", self.capacity_spacing))?;
        check(pos(self.level_step), || format!("level_step {} must be positive", self.level_step))?;
        if let Some(l) = &self.levels {
            check(!l.is_empty(), || "levels list is empty".into())?;
            check(l.iter().all(|v| v.is_finite()) && l.windows(2).all(|w| w[1] > w[0]), || {
                "levels must be finite and strictly increasing".into()
            })?;
        }
        Ok(())
    }

    /// Parses and validates a config file. Missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let mut c = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| -> Error { ParseError::new(ParseErrorKind::InvalidRecord, Position::Line(i + 1), msg).into() };
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let f = || value.parse::<f64>().map_err(|_| bad(format!("{key}: expected a number, got {value:?}")));
            let u = || value.parse::<usize>().map_err(|_| bad(format!("{key}: expected an integer, got {value:?}")));
            let auto_f = || -> Result<Option<f64>> { if value == "auto" { Ok(None) } else { f().map(Some) } };
            match key {
                "waterline_z" => c.waterline_z = f()?,
                "utm_zone" => {
                    c.utm_zone = if value == "auto" {
                        None
                    } else {
                        Some(value.parse::<u8>().map_err(|_| bad(format!("utm_zone: expected auto or 1..=60, got {value:?}")))?)
                    }
                }
                "grid_spacing" => c.grid_spacing = auto_f()?,
                "padding_cells" => c.padding_cells = u()?,
                "splat_radius_cells" => c.splat_radius_cells = u()?,
                "cg_tolerance" => c.cg_tolerance = f()?,
                "cg_max_iters" => c.cg_max_iters = u()?,
                "normal_k" => c.normal_k = u()?,
                "dedupe_tolerance" => c.dedupe_tolerance = f()?,
                "repair_alpha" => c.repair_alpha = f()?,
                "footprint_margin" => c.footprint_margin = f()?,
                "weld_tolerance" => c.weld_tolerance = f()?,
                "voxel_spacing" => c.voxel_spacing = f()?,
                "close_radius" => c.close_radius = u()?,
                "lid_z" => c.lid_z = auto_f()?,
                "idw_power" => c.idw_power = f()?,
                "idw_radius" => c.idw_radius = auto_f()?,
                "depthmap_spacing" => c.depthmap_spacing = f()?,
                "capacity_spacing" => c.capacity_spacing = f()?,
                "level_step" => c.level_step = f()?,
                "levels" => {
                    c.levels = if value == "auto" {
                        None
                    } else {
                        Some(
                            value
                                .split(|ch: char| ch == ',' || ch.is_whitespace())
                                .filter(|s| !s.is_empty())
                                .map(|s| s.parse::<f64>().map_err(|_| bad(format!("levels: bad number {s:?}"))))
                                .collect::<Result<Vec<f64>>>()?,
                        )
                    }
                }
                _ => return Err(bad(format!("unknown key {key:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        PipelineConfig::parse(&std::fs::read_to_string(path)?)
    }

    /// Reads `path`, else the file named by [`CONFIG_ENV`], else the defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<PipelineConfig> {
        match path {
            Some(p) => PipelineConfig::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => PipelineConfig::load(Path::new(&p)),
                _ => Ok(PipelineConfig::default()),
            },
        }
    }
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), |x| x.to_string())
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "waterline_z = {}", self.waterline_z)?;
        writeln!(f, "utm_zone = {}", opt(&self.utm_zone))?;
        writeln!(f, "grid_spacing = {}", opt(&self.grid_spacing))?;
        writeln!(f, "padding_cells = {}", self.padding_cells)?;
        writeln!(f, "splat_radius_cells = {}", self.splat_radius_cells)?;
        writeln!(f, "cg_tolerance = {:e}", self.cg_tolerance)?;
        writeln!(f, "cg_max_iters = {}", self.cg_max_iters)?;
        writeln!(f, "normal_k = {}", self.normal_k)?;
        writeln!(f, "dedupe_tolerance = {}", self.dedupe_tolerance)?;
        writeln!(f, "repair_alpha = {}", self.repair_alpha)?;
        writeln!(f, "footprint_margin = {}", self.footprint_margin)?;
        writeln!(f, "weld_tolerance = {}", self.weld_tolerance)?;
        writeln!(f, "voxel_spacing = {}", self.voxel_spacing)?;
        writeln!(f, "close_radius = {}", self.close_radius)?;
        writeln!(f, "lid_z = {}", opt(&self.lid_z))?;
        writeln!(f, "idw_power = {}", self.idw_power)?;
        writeln!(f, "idw_radius = {}", opt(&self.idw_radius))?;
        writeln!(f, "depthmap_spacing = {}", self.depthmap_spacing)?;
        writeln!(f, "capacity_spacing = {}", self.capacity_spacing)?;
        let levels = self.levels.as_ref().map(|l| l.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
        writeln!(f, "levels = {}", levels.unwrap_or_else(|| "auto".into()))?;
        writeln!(f, "level_step = {}", self.level_step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = PipelineConfig::default();
        assert_eq!(PipelineConfig::parse(&c.to_string()).unwrap(), c);
        let custom = PipelineConfig {
            utm_zone: Some(33),
            grid_spacing: None,
            levels: Some(vec![-3.0, -1.5, 0.0]),
            lid_z: Some(0.25),
            cg_tolerance: 3.5e-9,
            ..c
        };
        assert_eq!(PipelineConfig::parse(&custom.to_string()).unwrap(), custom);
    }

    #[test]
    fn comments_and_defaults() {
        let c = PipelineConfig::parse("# settings\n\nvoxel_spacing = 0.25 # finer\nlevels = -2, -1, 0\n").unwrap();
        assert_eq!(c.voxel_spacing, 0.25);
        assert_eq!(c.levels, Some(vec![-2.0, -1.0, 0.0]));
        assert_eq!(c.close_radius, PipelineConfig::default().close_radius);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "repair_alpha = 1\n",
            "voxel_spacing = 0\n",
            "close_radius = 0\n",
            "utm_zone = 61\n",
            "cg_tolerance = 2\n",
            "levels = 0 -1\n",
            "normal_k = 2\n",
            "splat_radius_cells = 0\n",
            "mystery = 1\n",
            "voxel_spacing 0.5\n",
            "grid_spacing = fine\n",
        ] {
            assert!(PipelineConfig::parse(text).is_err(), "{text}");
        }
        let e = PipelineConfig::parse("waterline_z = 0\nvoxel_spacing = x\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}
