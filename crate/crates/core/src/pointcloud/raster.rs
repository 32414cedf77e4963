//! Inverse-distance-weighted depth map.

use rayon::prelude::*;

use super::{GridIndex2D, PointCloud};
use crate::error::{Error, Result};
use crate::field::{GridLayout, ScalarField};

/// Mean distance from each point to its nearest distinct neighbour in (e, n).
pub fn mean_nn_spacing(cloud: &PointCloud) -> Option<f64> {
    let en = cloud.en();
    if en.len() < 2 {
        return None;
    }
    let index = GridIndex2D::new(&en, 2.0);
    let d: Vec<f64> = (0..en.len())
        .into_par_iter()
        .map(|i| {
            index
                .nearest(en[i], 8, Some(i as u32))
                .into_iter()
                .map(|(d, _)| d)
                .find(|&d| d > 0.0)
                .unwrap_or(0.0)
        })
        .collect();
    let m = d.iter().sum::<f64>() / d.len() as f64;
    (m > 0.0).then_some(m)
}

/// Node-centred 2D grid over the cloud's bounding box with IDW z per node;
/// nodes with no sample within `idw_radius` hold NaN. A `None` radius means
/// three times the mean nearest-neighbour spacing.
pub fn rasterize_depth_map(
    cloud: &PointCloud,
    spacing: f64,
    idw_power: f64,
    idw_radius: Option<f64>,
) -> Result<ScalarField> {
    if cloud.is_empty() {
        return Err(Error::Precondition("cannot rasterize an empty cloud".into()));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Parameter(format!("spacing {spacing} must be positive")));
    }
    if !(idw_power >= 0.0 && idw_power.is_finite()) {
        return Err(Error::Parameter(format!("idw power {idw_power} must be non-negative")));
    }
    let (lo, hi) = cloud.bounds().expect("non-empty");
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if extent > 0.0 && spacing > extent {
        return Err(Error::Resolution(format!(
            "spacing {spacing} m exceeds the cloud extent {extent} m"
        )));
    }
    let radius = match idw_radius {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::Parameter(format!("idw radius {r} must be positive"))),
        None => mean_nn_spacing(cloud).map_or(0.5 * spacing, |m| 3.0 * m),
    };
    let nx = (((hi[0] - lo[0]) / spacing).ceil() as usize + 1).max(2);
    let ny = (((hi[1] - lo[1]) / spacing).ceil() as usize + 1).max(2);
    let layout = GridLayout::new([lo[0], lo[1], 0.0], spacing, [nx, ny, 1])?;
    // Offsets are taken relative to the grid origin so the result depends only
    // on relative positions.
    let local: Vec<[f64; 2]> = cloud
        .points
        .iter()
        .map(|p| [p[0] - lo[0], p[1] - lo[1]])
        .collect();
    let index = GridIndex2D::new(&local, 2.0);
    let values: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|c| {
            let q = [(c % nx) as f64 * spacing, (c / nx) as f64 * spacing];
            let near = index.within(q, radius);
            if near.is_empty() {
                return f64::NAN;
            }
            let z_ref = cloud.points[near[0] as usize][2];
            let (mut exact, mut n_exact) = (0.0, 0usize);
            let (mut wsum, mut zsum) = (0.0, 0.0);
            for &i in &near {
                let p = local[i as usize];
                let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                let dz = cloud.points[i as usize][2] - z_ref;
                if d == 0.0 {
                    exact += dz;
                    n_exact += 1;
                } else {
                    let w = d.powf(-idw_power);
                    wsum += w;
                    zsum += w * dz;
                }
            }
            if n_exact > 0 {
                z_ref + exact / n_exact as f64
            } else {
                z_ref + zsum / wsum
            }
        })
        .collect();
    ScalarField::new(layout, values)
}
