//! Depth samples to an oriented point cloud in UTM meters.

mod hull;
mod index;
mod normals;
mod raster;

pub use hull::{convex_hull_2d, cross2, hull_centroid, point_segment_distance, Point2, Polygon2D};
pub use index::GridIndex2D;
pub use normals::estimate_normals;
pub use raster::{mean_nn_spacing, rasterize_depth_map};

use crate::error::{Error, Result};
use crate::geodesy::{wgs84_to_utm, zone_for_longitude, GeoCoord};
use crate::geom::{UnionFind, Vec3};
use crate::ingest::DepthSample;
use crate::mesh::Frame;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub frame: Frame,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>, frame: Frame) -> Self {
        PointCloud { points, normals: None, frame }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn en(&self) -> Vec<Point2> {
        self.points.iter().map(|p| [p[0], p[1]]).collect()
    }

    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        crate::geom::bounds(&self.points)
    }

    pub fn translated(&self, d: Vec3) -> PointCloud {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| [p[0] + d[0], p[1] + d[1], p[2] + d[2]])
                .collect(),
            normals: self.normals.clone(),
            frame: self.frame,
        }
    }

    /// Merges points whose (e, n) lie within `tol` of each other, averaging z.
    /// Output keeps the order of each group's first member; normals are dropped.
    pub fn dedupe(&self, tol: f64) -> PointCloud {
        let en = self.en();
        let index = GridIndex2D::new(&en, 2.0);
        let mut uf = UnionFind::new(en.len());
        for (i, p) in en.iter().enumerate() {
            for j in index.within(*p, tol) {
                if (j as usize) > i {
                    uf.union(i, j as usize);
                }
            }
        }
        let mut slot = vec![usize::MAX; en.len()];
        let mut sums: Vec<(Vec3, usize)> = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            let r = uf.find(i);
            if slot[r] == usize::MAX {
                slot[r] = sums.len();
                sums.push((*p, 1));
            } else {
                let s = &mut sums[slot[r]];
                s.0[2] += p[2];
                s.1 += 1;
            }
        }
        let points = sums
            .into_iter()
            .map(|(p, n)| [p[0], p[1], p[2] / n as f64])
            .collect();
        PointCloud { points, normals: None, frame: self.frame }
    }
}

/// Zone for a survey: the one containing the centroid of the samples' convex
/// hull in (lon, lat), or their mean longitude when the hull is degenerate.
pub fn survey_zone(samples: &[DepthSample]) -> Result<u8> {
    if samples.is_empty() {
        return Err(Error::Precondition("no samples".into()));
    }
    let ll: Vec<Point2> = samples.iter().map(|s| [s.lon, s.lat]).collect();
    let lon = match convex_hull_2d(&ll).and_then(|h| hull_centroid(&h)) {
        Ok(c) => c[0],
        Err(_) => ll.iter().map(|p| p[0]).sum::<f64>() / ll.len() as f64,
    };
    zone_for_longitude(lon)
}

/// Projects samples into one UTM zone with `z = waterline_z - depth`.
pub fn to_utm_cloud(samples: &[DepthSample], waterline_z: f64, zone: Option<u8>) -> Result<PointCloud> {
    if samples.is_empty() {
        return Err(Error::Precondition("no samples to project".into()));
    }
    let north = samples[0].lat >= 0.0;
    if let Some(s) = samples.iter().find(|s| (s.lat >= 0.0) != north) {
        return Err(Error::Frame(format!(
            "samples span both hemispheres (latitudes {} and {})",
            samples[0].lat, s.lat
        )));
    }
    let zone = match zone {
        Some(z) => z,
        None => survey_zone(samples)?,
    };
    let mut points = Vec::with_capacity(samples.len());
    for s in samples {
        let u = wgs84_to_utm(GeoCoord::new(s.lat, s.lon)?, Some(zone))?;
        points.push([u.easting, u.northing, waterline_z - s.depth]);
    }
    Ok(PointCloud::new(points, Frame::Utm { zone, north }))
}
