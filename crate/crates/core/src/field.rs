//! Regular grids: scalar fields (2D depth maps and 3D indicator functions).

use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Node-centred grid layout; node `(i, j, k)` sits at `origin + spacing * (i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLayout {
    pub origin: Vec3,
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl GridLayout {
    pub fn new(origin: Vec3, spacing: f64, dims: [usize; 3]) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Parameter(format!("grid spacing {spacing} must be positive")));
        }
        Ok(GridLayout { origin, spacing, dims })
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> Vec3 {
        [
            self.origin[0] + self.spacing * i as f64,
            self.origin[1] + self.spacing * j as f64,
            self.origin[2] + self.spacing * k as f64,
        ]
    }

    /// Continuous grid coordinates of a metric point.
    #[inline]
    pub fn to_grid(&self, p: Vec3) -> Vec3 {
        [
            (p[0] - self.origin[0]) / self.spacing,
            (p[1] - self.origin[1]) / self.spacing,
            (p[2] - self.origin[2]) / self.spacing,
        ]
    }

    pub fn max_corner(&self) -> Vec3 {
        self.node(
            self.dims[0].saturating_sub(1),
            self.dims[1].saturating_sub(1),
            self.dims[2].saturating_sub(1),
        )
    }
}

/// Dense scalar values on a [`GridLayout`]. A 2D field has `dims[2] == 1`.
/// NaN marks no-data cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub layout: GridLayout,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(layout: GridLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::Parameter(format!(
                "field has {} values for {} nodes",
                values.len(),
                layout.len()
            )));
        }
        Ok(ScalarField { layout, values })
    }

    pub fn filled(layout: GridLayout, v: f64) -> Self {
        ScalarField {
            values: vec![v; layout.len()],
            layout,
        }
    }

    /// Builds a field by evaluating `f` at every node.
    pub fn from_fn(layout: GridLayout, f: impl Fn(Vec3) -> f64) -> Self {
        let [nx, ny, nz] = layout.dims;
        let mut values = Vec::with_capacity(layout.len());
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    values.push(f(layout.node(i, j, k)));
                }
            }
        }
        ScalarField { layout, values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.layout.index(i, j, k)]
    }

    pub fn is_valid(&self, i: usize, j: usize, k: usize) -> bool {
        !self.get(i, j, k).is_nan()
    }

    /// Min and max over non-NaN values.
    pub fn range(&self) -> Option<(f64, f64)> {
        let mut it = self.values.iter().copied().filter(|v| !v.is_nan());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Trilinear sample of a 3D field; `None` outside the grid.
    pub fn sample_trilinear(&self, p: Vec3) -> Option<f64> {
        let g = self.layout.to_grid(p);
        let d = self.layout.dims;
        let mut base = [0usize; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let max = (d[a] - 1) as f64;
            if !(g[a] >= 0.0 && g[a] <= max) {
                return None;
            }
            if d[a] == 1 {
                base[a] = 0;
                t[a] = 0.0;
                continue;
            }
            let b = (g[a].floor() as usize).min(d[a] - 2);
            base[a] = b;
            t[a] = g[a] - b as f64;
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let o = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for a in 0..3 {
                if d[a] == 1 && o[a] == 1 {
                    w = 0.0;
                    break;
                }
                w *= if o[a] == 1 { t[a] } else { 1.0 - t[a] };
                idx[a] = base[a] + o[a];
            }
            if w != 0.0 {
                acc += w * self.get(idx[0], idx[1], idx[2]);
            }
        }
        Some(acc)
    }

    /// ESRI ASCII grid of a 2D field, rows written north to south. Node values
    /// are treated as cell centres.
    pub fn write_ascii_grid(&self, out: &mut impl Write, nodata: f64) -> Result<()> {
        let [nx, ny, _] = self.layout.dims;
        let s = self.layout.spacing;
        writeln!(out, "ncols {nx}")?;
        writeln!(out, "nrows {ny}")?;
        writeln!(out, "xllcorner {}", self.layout.origin[0] - 0.5 * s)?;
        writeln!(out, "yllcorner {}", self.layout.origin[1] - 0.5 * s)?;
        writeln!(out, "cellsize {s}")?;
        writeln!(out, "NODATA_value {nodata}")?;
        for j in (0..ny).rev() {
            let row: Vec<String> = (0..nx)
                .map(|i| {
                    let v = self.get(i, j, 0);
                    if v.is_nan() {
                        format!("{nodata}")
                    } else {
                        format!("{v}")
                    }
                })
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Debug dump: text header followed by little-endian f64 values, x fastest.
    pub fn write_raw(&self, out: &mut impl Write) -> Result<()> {
        let l = &self.layout;
        writeln!(out, "lakemesh-field 1")?;
        writeln!(out, "dims {} {} {}", l.dims[0], l.dims[1], l.dims[2])?;
        writeln!(out, "origin {} {} {}", l.origin[0], l.origin[1], l.origin[2])?;
        writeln!(out, "spacing {}", l.spacing)?;
        writeln!(out, "encoding float64_le")?;
        writeln!(out, "end_header")?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}
