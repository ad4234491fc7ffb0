//! Teodorescu and Cauchy transforms by dense midpoint quadrature.

use std::f64::consts::PI;

use crate::grid::{BoundaryData, Grid, QField, VoxelDomain};
use crate::quaternion::Quaternion;

/// `k * f` for a pure quaternion `k = (k1, k2, k3)`.
#[inline(always)]
fn pure_left(k: [f64; 3], f: Quaternion) -> Quaternion {
    Quaternion::new(
        -(k[0] * f.v1 + k[1] * f.v2 + k[2] * f.v3),
        k[0] * f.s + k[1] * f.v3 - k[2] * f.v2,
        k[1] * f.s - k[0] * f.v3 + k[2] * f.v1,
        k[2] * f.s + k[0] * f.v2 - k[1] * f.v1,
    )
}

/// Kernel table `w * z / |z|^3` over all cell offsets `z = (di, dj, dk) h`, zero at the origin.
#[derive(Clone, Debug)]
pub struct KernelTable {
    dims: [usize; 3],
    n: [usize; 3],
    values: Vec<[f64; 3]>,
}

impl KernelTable {
    pub fn new(grid: Grid, weight: f64) -> Self {
        let n = grid.n;
        let dims = n.map(|m| 2 * m - 1);
        let mut values = vec![[0.0; 3]; dims[0] * dims[1] * dims[2]];
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let z = [
                        (i as f64 - (n[0] - 1) as f64) * grid.h,
                        (j as f64 - (n[1] - 1) as f64) * grid.h,
                        (k as f64 - (n[2] - 1) as f64) * grid.h,
                    ];
                    let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
                    if r2 == 0.0 {
                        continue;
                    }
                    let s = weight / (r2 * r2.sqrt());
                    values[i + dims[0] * (j + dims[1] * k)] = [s * z[0], s * z[1], s * z[2]];
                }
            }
        }
        KernelTable { dims, n, values }
    }

    /// `sum_y K(x - y) f(y)` for the cell `x = (xi, xj, xk)`, accumulated in fixed cell order.
    fn apply_at(&self, x: [usize; 3], f: &[Quaternion]) -> Quaternion {
        let n = self.n;
        let d = self.dims;
        let mut acc = Quaternion::ZERO;
        for yk in 0..n[2] {
            let ok = x[2] + n[2] - 1 - yk;
            for yj in 0..n[1] {
                let oj = x[1] + n[1] - 1 - yj;
                let row = d[0] * (oj + d[1] * ok);
                let base = n[0] * (yj + n[1] * yk);
                let fy = &f[base..base + n[0]];
                let krow = &self.values[row + x[0]..row + x[0] + n[0]];
                // offset index for yi is x0 + n0 - 1 - yi, i.e. krow reversed
                for (yi, &fv) in fy.iter().enumerate() {
                    let kv = krow[n[0] - 1 - yi];
                    acc += pure_left(kv, fv);
                }
            }
        }
        acc
    }
}

/// `sigma * (1 / 4 pi) * h^3 * sum_{y != x} K(x - y) f(y)` with `K(z) = z / |z|^3`.
pub fn teodorescu_with(table: &KernelTable, f: &QField) -> QField {
    let g = f.grid;
    let eval = |c: usize| table.apply_at(g.coords(c), &f.values);
    #[cfg(feature = "parallel")]
    let values = {
        use rayon::prelude::*;
        (0..g.len()).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values = (0..g.len()).map(eval).collect();
    QField { grid: g, values }
}

pub fn teodorescu_table(grid: Grid, sigma: f64) -> KernelTable {
    KernelTable::new(grid, sigma * grid.cell_volume() / (4.0 * PI))
}

/// `sigma * (-1 / 4 pi) * sum_faces K(x - y_f) n_f g_f h^2`.
pub fn cauchy_with(domain: &VoxelDomain, sigma: f64, g: &BoundaryData) -> QField {
    let grid = domain.grid;
    let w = -sigma / (4.0 * PI);
    // n_f g_f does not depend on x
    let ng: Vec<([f64; 3], Quaternion, f64)> = domain
        .boundary_faces
        .iter()
        .zip(&g.values)
        .map(|(f, &v)| (f.center, v.left_unit(f.axis) * f.orientation as f64, f.area))
        .collect();
    let eval = |c: usize| {
        let x = grid.center(c);
        let mut acc = Quaternion::ZERO;
        for &(y, q, area) in &ng {
            let z = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
            let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
            let s = w * area / (r2 * r2.sqrt());
            acc += pure_left([s * z[0], s * z[1], s * z[2]], q);
        }
        acc
    };
    #[cfg(feature = "parallel")]
    let values = {
        use rayon::prelude::*;
        (0..grid.len()).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values = (0..grid.len()).map(eval).collect();
    QField { grid, values }
}
