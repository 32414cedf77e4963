//! Conjugate gradient on the 7-point graph Laplacian with Neumann boundary.

use rayon::prelude::*;

use super::splat::VectorField3;
use crate::error::{Error, Result};
use crate::field::{GridLayout, ScalarField};

const CHUNK: usize = 4096;
const GROWTH_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final ‖r‖ / ‖b‖.
    pub residual: f64,
}

/// Sum of products over fixed chunks, combined in order, so the result does
/// not depend on the thread count.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

fn sum(a: &[f64]) -> f64 {
    let partial: Vec<f64> = a.par_chunks(CHUNK).map(|x| x.iter().sum::<f64>()).collect();
    partial.iter().sum()
}

/// `out = L x` where `(L x)_a = Σ_{neighbours b} (x_a - x_b)`.
pub fn apply_laplacian(dims: [usize; 3], x: &[f64], out: &mut [f64]) {
    let [nx, ny, nz] = dims;
    let plane = nx * ny;
    out.par_chunks_mut(plane).enumerate().for_each(|(k, slab)| {
        for j in 0..ny {
            for i in 0..nx {
                let a = i + nx * j + plane * k;
                let xa = x[a];
                let mut acc = 0.0;
                if i > 0 {
                    acc += xa - x[a - 1];
                }
                if i + 1 < nx {
                    acc += xa - x[a + 1];
                }
                if j > 0 {
                    acc += xa - x[a - nx];
                }
                if j + 1 < ny {
                    acc += xa - x[a + nx];
                }
                if k > 0 {
                    acc += xa - x[a - plane];
                }
                if k + 1 < nz {
                    acc += xa - x[a + plane];
                }
                slab[i + nx * j] = acc;
            }
        }
    });
}

/// Right-hand side `Dᵀg` for edge targets `g_e = -h V_e`, with `V_e` the mean
/// of the two endpoint components along the edge axis. The solution's
/// gradient then approximates `-V`.
pub fn divergence_rhs(field: &VectorField3) -> Vec<f64> {
    let l = field.layout;
    let [nx, ny, nz] = l.dims;
    let h = l.spacing;
    let stride = [1, nx, nx * ny];
    let mut b = vec![0.0; l.len()];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let a = l.index(i, j, k);
                let ijk = [i, j, k];
                for ax in 0..3 {
                    if ijk[ax] + 1 >= l.dims[ax] {
                        continue;
                    }
                    let c = a + stride[ax];
                    let ve = 0.5 * (field.values[a][ax] + field.values[c][ax]);
                    b[a] += h * ve;
                    b[c] -= h * ve;
                }
            }
        }
    }
    b
}

/// Solves `L x = b` by plain conjugate gradient. `b` is projected onto zero
/// mean first and the returned solution is mean-centred.
pub fn solve_poisson(dims: [usize; 3], b: &[f64], tolerance: f64, max_iters: usize) -> Result<(Vec<f64>, SolveReport)> {
    let n = dims[0] * dims[1] * dims[2];
    if b.len() != n {
        return Err(Error::Parameter(format!("rhs has {} entries for {n} nodes", b.len())));
    }
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::Parameter(format!("cg tolerance {tolerance} outside (0, 1)")));
    }
    if max_iters == 0 {
        return Err(Error::Parameter("cg_max_iters must be at least 1".into()));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("right-hand side is not finite".into()));
    }
    let mean = sum(b) / n as f64;
    let mut r: Vec<f64> = b.iter().map(|v| v - mean).collect();
    let bnorm = dot(&r, &r).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, SolveReport { iterations: 0, residual: 0.0 }));
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut prev = rr.sqrt();
    let mut growth = 0usize;
    let mut iterations = 0usize;
    let mut rel = 1.0;
    while iterations < max_iters {
        apply_laplacian(dims, &p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver {
                iterations,
                residual: rel,
                reason: format!("search direction lost positive curvature (pAp = {pap:e})"),
            });
        }
        let alpha = rr / pap;
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        let rr_new = dot(&r, &r);
        iterations += 1;
        let rn = rr_new.sqrt();
        rel = rn / bnorm;
        if !rel.is_finite() {
            return Err(Error::Solver {
                iterations,
                residual: rel,
                reason: "residual is not finite".into(),
            });
        }
        if rel <= tolerance {
            break;
        }
        growth = if rn > prev { growth + 1 } else { 0 };
        if growth >= GROWTH_LIMIT {
            return Err(Error::Solver {
                iterations,
                residual: rel,
                reason: format!("residual grew for {GROWTH_LIMIT} consecutive iterations"),
            });
        }
        prev = rn;
        let beta = rr_new / rr;
        rr = rr_new;
        p.par_iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
    }
    if rel > tolerance {
        return Err(Error::Solver {
            iterations,
            residual: rel,
            reason: format!("tolerance {tolerance:e} not reached within {max_iters} iterations"),
        });
    }
    let m = sum(&x) / n as f64;
    x.par_iter_mut().for_each(|v| *v -= m);
    Ok((x, SolveReport { iterations, residual: rel }))
}

/// Indicator function whose gradient best matches `-V` in least squares:
/// high below an upward-oriented surface, low above it.
pub fn solve_indicator(field: &VectorField3, tolerance: f64, max_iters: usize) -> Result<(ScalarField, SolveReport)> {
    if field.values.len() != field.layout.len() {
        return Err(Error::Precondition("vector field does not match its layout".into()));
    }
    if field.values.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
        return Err(Error::Precondition("vector field is not finite".into()));
    }
    let b = divergence_rhs(field);
    let (x, report) = solve_poisson(field.layout.dims, &b, tolerance, max_iters)?;
    log::debug!(
        "poisson solve: {} iterations, relative residual {:.3e}",
        report.iterations,
        report.residual
    );
    Ok((ScalarField::new(field.layout, x)?, report))
}

/// Dense `L` for small grids, used by tests and diagnostics.
pub fn dense_laplacian(layout: &GridLayout) -> Vec<Vec<f64>> {
    let n = layout.len();
    let mut m = vec![vec![0.0; n]; n];
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for c in 0..n {
        e[c] = 1.0;
        apply_laplacian(layout.dims, &e, &mut col);
        for r in 0..n {
            m[r][c] = col[r];
        }
        e[c] = 0.0;
    }
    m
}
