//! Per-point normals from a PCA plane fit over k nearest (e, n) neighbours.

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;

use super::{GridIndex2D, PointCloud};
use crate::error::{Error, Result};
use crate::geom::Vec3;

const UP: Vec3 = [0.0, 0.0, 1.0];

fn fit_normal(points: &[Vec3], nbrs: impl Iterator<Item = usize> + Clone) -> Vec3 {
    let n = nbrs.clone().count() as f64;
    let mut c = [0.0; 3];
    for i in nbrs.clone() {
        for a in 0..3 {
            c[a] += points[i][a];
        }
    }
    for v in c.iter_mut() {
        *v /= n;
    }
    let mut cov = Matrix3::<f64>::zeros();
    for i in nbrs {
        let d = [points[i][0] - c[0], points[i][1] - c[1], points[i][2] - c[2]];
        for r in 0..3 {
            for s in 0..3 {
                cov[(r, s)] += d[r] * d[s];
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (l0, l1, l2) = (
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );
    if !(l2 > 0.0 && l0.is_finite()) || l1 <= 1e-12 * l2 {
        return UP;
    }
    let v = eig.eigenvectors.column(order[0]);
    let len = v.norm();
    if !(len > 0.0 && len.is_finite()) {
        return UP;
    }
    let mut nrm = [v[0] / len, v[1] / len, v[2] / len];
    if nrm[2] < 0.0 {
        nrm = [-nrm[0], -nrm[1], -nrm[2]];
    }
    if nrm[2] <= 0.0 {
        // Vertical plane: no upward orientation exists.
        return UP;
    }
    nrm
}

/// Returns a copy of the cloud with unit normals, each with positive z.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<PointCloud> {
    if k < 3 {
        return Err(Error::Parameter(format!("normal estimation needs k >= 3, got {k}")));
    }
    if cloud.len() < k + 1 {
        return Err(Error::Precondition(format!(
            "normal estimation with k = {k} needs at least {} points, got {}",
            k + 1,
            cloud.len()
        )));
    }
    let en = cloud.en();
    let index = GridIndex2D::new(&en, 2.0);
    let normals: Vec<Vec3> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let nb = index.nearest(en[i], k, Some(i as u32));
            let ids = std::iter::once(i).chain(nb.iter().map(|x| x.1 as usize));
            fit_normal(&cloud.points, ids)
        })
        .collect();
    Ok(PointCloud {
        points: cloud.points.clone(),
        normals: Some(normals),
        frame: cloud.frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Frame;
    use rand::{Rng, SeedableRng};

    fn scattered(n: usize, f: impl Fn(f64, f64) -> f64) -> PointCloud {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let pts = (0..n)
            .map(|_| {
                let (e, nn) = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
                [e, nn, f(e, nn)]
            })
            .collect();
        PointCloud::new(pts, Frame::Local)
    }

    #[test]
    fn flat_bed_points_up() {
        let c = estimate_normals(&scattered(300, |_, _| -2.0), 8).unwrap();
        for n in c.normals.unwrap() {
            assert!((n[0]).abs() < 1e-6 && (n[1]).abs() < 1e-6 && (n[2] - 1.0).abs() < 1e-6, "{n:?}");
        }
    }

    #[test]
    fn sloped_plane() {
        let c = estimate_normals(&scattered(300, |e, _| e), 8).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for n in c.normals.unwrap() {
            assert!((n[0] + h).abs() < 0.02 && n[1].abs() < 0.02 && (n[2] - h).abs() < 0.02, "{n:?}");
        }
    }

    #[test]
    fn collinear_falls_back_to_up() {
        let pts = (0..10).map(|i| [i as f64, 2.0 * i as f64, 0.3 * i as f64]).collect();
        let c = estimate_normals(&PointCloud::new(pts, Frame::Local), 4).unwrap();
        assert!(c.normals.unwrap().iter().all(|n| *n == UP));
    }

    #[test]
    fn parameter_checks() {
        let c = scattered(10, |_, _| 0.0);
        assert!(matches!(estimate_normals(&c, 2), Err(Error::Parameter(_))));
        assert!(matches!(estimate_normals(&c, 10), Err(Error::Precondition(_))));
        assert!(estimate_normals(&c, 9).is_ok());
    }

    #[test]
    fn paraboloid_angular_error() {
        let (d0, r) = (4.0, 30.0);
        let c = estimate_normals(&scattered(2000, |e, n| -d0 * (1.0 - (e * e + n * n) / (r * r))), 8).unwrap();
        let mut total = 0.0;
        for (p, n) in c.points.iter().zip(c.normals.as_ref().unwrap()) {
            let g = [-2.0 * d0 * p[0] / (r * r), -2.0 * d0 * p[1] / (r * r), 1.0];
            let gl = crate::geom::norm(g);
            total += (crate::geom::dot(*n, g) / gl).clamp(-1.0, 1.0).acos().to_degrees();
        }
        let mean = total / c.len() as f64;
        assert!(mean <= 5.0, "mean angular error {mean}");
    }
}
