use nalgebra::{DMatrix, DVector};

use super::{MeshError, Triangulation};

const BARY_TOL: f64 = 1e-9;

fn barycentric(t: &Triangulation, i: usize, x_inv: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let n = t.dim();
    let x0 = t.vertex(t.simplex(i)[0]);
    let d = DVector::from_fn(n, |k, _| x[k] - x0[k]);
    let tail = x_inv.transpose() * d;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0 - tail.sum());
    out.extend(tail.iter());
    out
}

fn clamp(lam: Vec<f64>) -> Option<Vec<f64>> {
    lam.iter()
        .all(|&l| (-BARY_TOL..=1.0 + BARY_TOL).contains(&l))
        .then_some(lam)
}

pub(super) fn brute_force(t: &Triangulation, x: &[f64]) -> Result<(usize, Vec<f64>), MeshError> {
    check_dim(t, x)?;
    for i in 0..t.num_simplices() {
        let Some(inv) = t.edge_matrix(i).try_inverse() else {
            continue;
        };
        if let Some(lam) = clamp(barycentric(t, i, &inv, x)) {
            return Ok((i, lam));
        }
    }
    Err(MeshError::PointOutside(x.to_vec()))
}

fn check_dim(t: &Triangulation, x: &[f64]) -> Result<(), MeshError> {
    if x.len() != t.dim() {
        return Err(MeshError::DimensionMismatch {
            expected: t.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Bucket grid over the mesh bounding box for repeated point location.
pub struct Locator<'a> {
    mesh: &'a Triangulation,
    inverses: Vec<DMatrix<f64>>,
    lo: Vec<f64>,
    cell: Vec<f64>,
    res: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> Locator<'a> {
    pub fn new(mesh: &'a Triangulation) -> Self {
        let n = mesh.dim();
        let m = mesh.num_simplices();
        let inverses = (0..m)
            .map(|i| {
                mesh.edge_matrix(i)
                    .try_inverse()
                    .unwrap_or_else(|| DMatrix::zeros(n, n))
            })
            .collect();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for v in mesh.vertices() {
            for k in 0..n {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let res = ((m as f64).powf(1.0 / n as f64).ceil() as usize).max(1);
        let cell: Vec<f64> = (0..n)
            .map(|k| ((hi[k] - lo[k]) / res as f64).max(f64::MIN_POSITIVE))
            .collect();
        let mut loc = Locator {
            mesh,
            inverses,
            lo,
            cell,
            res,
            buckets: vec![Vec::new(); res.pow(n as u32)],
        };
        for i in 0..m {
            let bb = mesh.bounding_box(i);
            let lo_idx: Vec<usize> = (0..n).map(|k| loc.axis_index(k, bb[k].0)).collect();
            let hi_idx: Vec<usize> = (0..n).map(|k| loc.axis_index(k, bb[k].1)).collect();
            let mut cur = lo_idx.clone();
            loop {
                let b = loc.flat(&cur);
                loc.buckets[b].push(i);
                let mut k = 0;
                while k < n {
                    if cur[k] < hi_idx[k] {
                        cur[k] += 1;
                        break;
                    }
                    cur[k] = lo_idx[k];
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
        loc
    }

    fn axis_index(&self, k: usize, v: f64) -> usize {
        let r = ((v - self.lo[k]) / self.cell[k]).floor();
        (r.max(0.0) as usize).min(self.res - 1)
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &i| acc * self.res + i)
    }

    pub fn locate(&self, x: &[f64]) -> Result<(usize, Vec<f64>), MeshError> {
        check_dim(self.mesh, x)?;
        let idx: Vec<usize> = (0..x.len()).map(|k| self.axis_index(k, x[k])).collect();
        for &i in &self.buckets[self.flat(&idx)] {
            if let Some(lam) = clamp(barycentric(self.mesh, i, &self.inverses[i], x)) {
                return Ok((i, lam));
            }
        }
        for i in 0..self.mesh.num_simplices() {
            if let Some(lam) = clamp(barycentric(self.mesh, i, &self.inverses[i], x)) {
                return Ok((i, lam));
            }
        }
        Err(MeshError::PointOutside(x.to_vec()))
    }
}
