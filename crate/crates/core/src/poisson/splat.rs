//! Splatting oriented normals onto a node grid.

use crate::error::{Error, Result};
use crate::field::GridLayout;
use crate::geom::Vec3;
use crate::pointcloud::PointCloud;

/// Three components per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub layout: GridLayout,
    pub values: Vec<Vec3>,
}

impl VectorField3 {
    pub fn zeros(layout: GridLayout) -> Self {
        VectorField3 {
            values: vec![[0.0; 3]; layout.len()],
            layout,
        }
    }

    /// Sum of each component over all nodes.
    pub fn component_sums(&self) -> Vec3 {
        let mut s = [0.0; 3];
        for v in &self.values {
            for a in 0..3 {
                s[a] += v[a];
            }
        }
        s
    }
}

/// Tent weights of half-width `r` cells along one axis: `(node, weight)` pairs
/// with weights summing to one when every node lies inside `0..n`.
pub(crate) fn tent_weights(u: f64, r: usize, n: usize) -> Vec<(usize, f64)> {
    let rf = r as f64;
    let lo = (u - rf).floor() as i64 + 1;
    let hi = (u + rf).ceil() as i64 - 1;
    let mut out = Vec::with_capacity(2 * r);
    for i in lo.max(0)..=hi.min(n as i64 - 1) {
        let w = 1.0 - (u - i as f64).abs() / rf;
        if w > 0.0 {
            out.push((i as usize, w / rf));
        }
    }
    out
}

/// Accumulates each point's normal onto the surrounding nodes with a separable
/// tent kernel of radius `radius_cells`; radius 1 is trilinear.
pub fn splat_normals(cloud: &PointCloud, layout: GridLayout, radius_cells: usize) -> Result<VectorField3> {
    let normals = cloud
        .normals
        .as_ref()
        .ok_or_else(|| Error::Precondition("point cloud has no normals".into()))?;
    if radius_cells == 0 {
        return Err(Error::Parameter("splat radius must be at least one cell".into()));
    }
    let mut field = VectorField3::zeros(layout);
    let d = layout.dims;
    for (p, n) in cloud.points.iter().zip(normals) {
        let g = layout.to_grid(*p);
        let wx = tent_weights(g[0], radius_cells, d[0]);
        let wy = tent_weights(g[1], radius_cells, d[1]);
        let wz = tent_weights(g[2], radius_cells, d[2]);
        for &(k, c) in &wz {
            for &(j, b) in &wy {
                let bc = b * c;
                for &(i, a) in &wx {
                    let w = a * bc;
                    let v = &mut field.values[layout.index(i, j, k)];
                    v[0] += w * n[0];
                    v[1] += w * n[1];
                    v[2] += w * n[2];
                }
            }
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_partition_of_unity() {
        for r in 1..5 {
            for u in [10.0, 10.25, 10.5, 10.999] {
                let s: f64 = tent_weights(u, r, 100).iter().map(|x| x.1).sum();
                assert!((s - 1.0).abs() < 1e-14, "r={r} u={u} sum={s}");
            }
        }
        assert_eq!(tent_weights(3.5, 1, 10), vec![(3, 0.5), (4, 0.5)]);
        assert_eq!(tent_weights(3.0, 1, 10), vec![(3, 1.0)]);
    }
}
