//! Uniform bucket grid over (e, n) for neighbour queries.

use std::cmp::Ordering;

pub struct GridIndex2D {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    items: Vec<u32>,
    pts: Vec<[f64; 2]>,
}

impl GridIndex2D {
    /// Builds an index with roughly `per_cell` points per occupied cell.
    pub fn new(pts: &[[f64; 2]], per_cell: f64) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in pts {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        if pts.is_empty() {
            lo = [0.0; 2];
            hi = [0.0; 2];
        }
        let w = (hi[0] - lo[0]).max(0.0);
        let h = (hi[1] - lo[1]).max(0.0);
        let area = (w * h).max(w.max(h) * w.max(h) * 1e-6);
        let mut cell = (area * per_cell / pts.len().max(1) as f64).sqrt();
        if !(cell > 0.0 && cell.is_finite()) {
            cell = 1.0;
        }
        // Keep the table bounded for pathological extents.
        let max_cells = (4 * pts.len()).max(16) as f64;
        while (w / cell + 1.0) * (h / cell + 1.0) > max_cells {
            cell *= 1.5;
        }
        let nx = (w / cell) as usize + 1;
        let ny = (h / cell) as usize + 1;
        let mut counts = vec![0usize; nx * ny + 1];
        let key = |p: &[f64; 2]| -> usize {
            let i = (((p[0] - lo[0]) / cell) as usize).min(nx - 1);
            let j = (((p[1] - lo[1]) / cell) as usize).min(ny - 1);
            i + nx * j
        };
        for p in pts {
            counts[key(p) + 1] += 1;
        }
        for c in 1..counts.len() {
            counts[c] += counts[c - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; pts.len()];
        for (idx, p) in pts.iter().enumerate() {
            let c = key(p);
            items[fill[c]] = idx as u32;
            fill[c] += 1;
        }
        GridIndex2D {
            origin: lo,
            cell,
            nx,
            ny,
            starts: counts,
            items,
            pts: pts.to_vec(),
        }
    }

    fn cell_of(&self, p: [f64; 2]) -> (i64, i64) {
        (
            ((p[0] - self.origin[0]) / self.cell).floor() as i64,
            ((p[1] - self.origin[1]) / self.cell).floor() as i64,
        )
    }

    fn visit_cell(&self, i: i64, j: i64, mut f: impl FnMut(u32)) {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return;
        }
        let c = i as usize + self.nx * j as usize;
        for &it in &self.items[self.starts[c]..self.starts[c + 1]] {
            f(it);
        }
    }

    #[inline]
    fn d2(&self, idx: u32, p: [f64; 2]) -> f64 {
        let q = self.pts[idx as usize];
        let dx = q[0] - p[0];
        let dy = q[1] - p[1];
        dx * dx + dy * dy
    }

    /// Indices of all points within `radius` of `p`, ascending by index.
    pub fn within(&self, p: [f64; 2], radius: f64) -> Vec<u32> {
        let r2 = radius * radius;
        let (i0, j0) = self.cell_of([p[0] - radius, p[1] - radius]);
        let (i1, j1) = self.cell_of([p[0] + radius, p[1] + radius]);
        let mut out = Vec::new();
        let i0 = i0.max(0);
        let j0 = j0.max(0);
        let i1 = i1.min(self.nx as i64 - 1);
        let j1 = j1.min(self.ny as i64 - 1);
        for j in j0..=j1 {
            for i in i0..=i1 {
                self.visit_cell(i, j, |it| {
                    if self.d2(it, p) <= r2 {
                        out.push(it);
                    }
                });
            }
        }
        out.sort_unstable();
        out
    }

    /// The `k` nearest points to `p`, excluding index `skip`, ordered by
    /// (distance, index).
    pub fn nearest(&self, p: [f64; 2], k: usize, skip: Option<u32>) -> Vec<(f64, u32)> {
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        if k == 0 {
            return best;
        }
        let (ci, cj) = self.cell_of(p);
        let max_ring = self.nx.max(self.ny) as i64 + 1 + ci.abs().max(cj.abs());
        let cmp = |a: &(f64, u32), b: &(f64, u32)| {
            a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
        };
        for ring in 0..=max_ring {
            let mut consider = |i: i64, j: i64| {
                self.visit_cell(i, j, |it| {
                    if Some(it) == skip {
                        return;
                    }
                    let cand = (self.d2(it, p), it);
                    if best.len() < k {
                        best.push(cand);
                        best.sort_by(cmp);
                    } else if cmp(&cand, &best[k - 1]) == Ordering::Less {
                        best[k - 1] = cand;
                        best.sort_by(cmp);
                    }
                });
            };
            if ring == 0 {
                consider(ci, cj);
            } else {
                for d in -ring..=ring {
                    consider(ci + d, cj - ring);
                    consider(ci + d, cj + ring);
                }
                for d in (-ring + 1)..ring {
                    consider(ci - ring, cj + d);
                    consider(ci + ring, cj + d);
                }
            }
            if best.len() == k {
                // Every unvisited point is at least `ring * cell` away.
                let reach = ring as f64 * self.cell;
                if best[k - 1].0 <= reach * reach {
                    break;
                }
            }
        }
        best.into_iter().map(|(d2, i)| (d2.sqrt(), i)).collect()
    }
}
