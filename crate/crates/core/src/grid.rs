//! Voxel domains, quaternion grid functions, and the discrete inner products and norms.
//!
//! Cells are stored x-fastest: `index = i + n0 * (j + n1 * k)`. Values sit at cell
//! centres `origin + (i + 1/2) h`.

use std::ops::{Index, IndexMut};

use crate::quaternion::Quaternion;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub origin: [f64; 3],
    pub n: [usize; 3],
    pub h: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    #[inline]
    pub fn coords(&self, c: usize) -> [usize; 3] {
        let i = c % self.n[0];
        let r = c / self.n[0];
        [i, r % self.n[1], r / self.n[1]]
    }

    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.n[0],
            _ => self.n[0] * self.n[1],
        }
    }

    pub fn center(&self, c: usize) -> [f64; 3] {
        let ijk = self.coords(c);
        [
            self.origin[0] + (ijk[0] as f64 + 0.5) * self.h,
            self.origin[1] + (ijk[1] as f64 + 0.5) * self.h,
            self.origin[2] + (ijk[2] as f64 + 0.5) * self.h,
        ]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    /// True if the cell touches the boundary (lies in the one-cell collar).
    pub fn in_collar(&self, c: usize) -> bool {
        let ijk = self.coords(c);
        (0..3).any(|a| ijk[a] == 0 || ijk[a] + 1 == self.n[a])
    }

    /// Distance (in cells) from the cell to the nearest boundary layer, 0 for collar cells.
    pub fn depth(&self, c: usize) -> usize {
        let ijk = self.coords(c);
        (0..3).map(|a| ijk[a].min(self.n[a] - 1 - ijk[a])).min().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFace {
    pub cell: usize,
    pub axis: usize,
    /// +1 for the face on the high side of the cell, -1 for the low side.
    pub orientation: i8,
    pub normal: [f64; 3],
    pub area: f64,
    pub center: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoxelDomain {
    pub grid: Grid,
    /// True for cells that do not touch the boundary.
    pub interior_mask: Vec<bool>,
    pub boundary_faces: Vec<BoundaryFace>,
}

impl VoxelDomain {
    /// Box `[origin, origin + extent]` split into `n` cells per axis. The spacing must be isotropic.
    pub fn build(origin: [f64; 3], extent: [f64; 3], n: [usize; 3]) -> Result<Self, Error> {
        for a in 0..3 {
            if n[a] < 2 {
                return Err(Error::InvalidDomain(format!("need n >= 2 per axis, got {}", n[a])));
            }
            if !(extent[a] > 0.0) || !extent[a].is_finite() {
                return Err(Error::InvalidDomain(format!("extent {} must be positive", extent[a])));
            }
        }
        let hs = [0, 1, 2].map(|a| extent[a] / n[a] as f64);
        let h = hs[0];
        if hs.iter().any(|&x| ((x - h) / h).abs() > 1e-12) {
            return Err(Error::InvalidDomain(format!("anisotropic spacing {hs:?}")));
        }
        let grid = Grid { origin, n, h };
        let interior_mask = (0..grid.len()).map(|c| !grid.in_collar(c)).collect();
        let mut boundary_faces = Vec::with_capacity(2 * (n[0] * n[1] + n[1] * n[2] + n[0] * n[2]));
        for axis in 0..3 {
            for orientation in [-1i8, 1] {
                let layer = if orientation < 0 { 0 } else { n[axis] - 1 };
                for c in 0..grid.len() {
                    if grid.coords(c)[axis] != layer {
                        continue;
                    }
                    let mut normal = [0.0; 3];
                    normal[axis] = orientation as f64;
                    let mut center = grid.center(c);
                    center[axis] += 0.5 * h * orientation as f64;
                    boundary_faces.push(BoundaryFace { cell: c, axis, orientation, normal, area: h * h, center });
                }
            }
        }
        Ok(VoxelDomain { grid, interior_mask, boundary_faces })
    }

    pub fn unit_cube(n: usize) -> Result<Self, Error> {
        Self::build([0.0; 3], [1.0; 3], [n; 3])
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// Quaternion-valued grid function.
#[derive(Clone, Debug, PartialEq)]
pub struct QField {
    pub grid: Grid,
    pub values: Vec<Quaternion>,
}

impl Index<usize> for QField {
    type Output = Quaternion;
    fn index(&self, c: usize) -> &Quaternion {
        &self.values[c]
    }
}

impl IndexMut<usize> for QField {
    fn index_mut(&mut self, c: usize) -> &mut Quaternion {
        &mut self.values[c]
    }
}

impl QField {
    pub fn zeros(grid: Grid) -> Self {
        QField { grid, values: vec![Quaternion::ZERO; grid.len()] }
    }

    pub fn constant(grid: Grid, q: Quaternion) -> Self {
        QField { grid, values: vec![q; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> Quaternion) -> Self {
        QField { grid, values: (0..grid.len()).map(|c| f(grid.center(c))).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_same(&self, other: &QField) -> Result<(), Error> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(Quaternion) -> Quaternion) -> QField {
        QField { grid: self.grid, values: self.values.iter().map(|&q| f(q)).collect() }
    }

    pub fn zip(&self, other: &QField, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> QField {
        debug_assert_eq!(self.grid, other.grid);
        QField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &QField) -> QField {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &QField) -> QField {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, a: f64) -> QField {
        self.map(|q| q * a)
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &QField) -> QField {
        self.zip(other, |x, y| x + y * a)
    }

    pub fn vec_part(&self) -> QField {
        self.map(Quaternion::vec)
    }

    pub fn sc_part(&self) -> QField {
        self.map(|q| Quaternion::scalar(q.s))
    }

    pub fn is_pure(&self) -> bool {
        self.values.iter().all(|q| q.s == 0.0)
    }

    pub fn is_scalar(&self) -> bool {
        self.values.iter().all(|q| q.v1 == 0.0 && q.v2 == 0.0 && q.v3 == 0.0)
    }

    /// Plain Euclidean dot product of all components (no volume weight).
    pub fn dot(&self, other: &QField) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a.dot(*b);
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Quaternion {
        let mut acc = Quaternion::ZERO;
        for &q in &self.values {
            acc += q;
        }
        acc * (1.0 / self.values.len() as f64)
    }

    /// Forward difference along `axis`, backward at the last layer.
    pub fn diff_fwd(&self, axis: usize) -> QField {
        let g = self.grid;
        let st = g.stride(axis);
        let inv_h = 1.0 / g.h;
        let values = (0..g.len())
            .map(|c| {
                let i = g.coords(c)[axis];
                if i + 1 < g.n[axis] {
                    (self.values[c + st] - self.values[c]) * inv_h
                } else {
                    (self.values[c] - self.values[c - st]) * inv_h
                }
            })
            .collect();
        QField { grid: g, values }
    }

    /// Backward difference along `axis`, forward at the first layer.
    pub fn diff_bwd(&self, axis: usize) -> QField {
        let g = self.grid;
        let st = g.stride(axis);
        let inv_h = 1.0 / g.h;
        let values = (0..g.len())
            .map(|c| {
                let i = g.coords(c)[axis];
                if i > 0 {
                    (self.values[c] - self.values[c - st]) * inv_h
                } else {
                    (self.values[c + st] - self.values[c]) * inv_h
                }
            })
            .collect();
        QField { grid: g, values }
    }

    /// Central difference along `axis`, one-sided at both end layers.
    pub fn diff_central(&self, axis: usize) -> QField {
        let g = self.grid;
        let st = g.stride(axis);
        let inv_h = 1.0 / g.h;
        let values = (0..g.len())
            .map(|c| {
                let i = g.coords(c)[axis];
                if i == 0 {
                    (self.values[c + st] - self.values[c]) * inv_h
                } else if i + 1 == g.n[axis] {
                    (self.values[c] - self.values[c - st]) * inv_h
                } else {
                    (self.values[c + st] - self.values[c - st]) * (0.5 * inv_h)
                }
            })
            .collect();
        QField { grid: g, values }
    }
}

/// Quaternion per boundary face, in the order of `VoxelDomain::boundary_faces`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    pub grid: Grid,
    pub values: Vec<Quaternion>,
}

impl BoundaryData {
    pub fn new(domain: &VoxelDomain, values: Vec<Quaternion>) -> Result<Self, Error> {
        if values.len() != domain.boundary_faces.len() {
            return Err(Error::Precondition(format!(
                "boundary data has {} values, domain has {} faces",
                values.len(),
                domain.boundary_faces.len()
            )));
        }
        Ok(BoundaryData { grid: domain.grid, values })
    }

    pub fn zeros(domain: &VoxelDomain) -> Self {
        BoundaryData { grid: domain.grid, values: vec![Quaternion::ZERO; domain.boundary_faces.len()] }
    }

    pub fn from_fn(domain: &VoxelDomain, f: impl Fn([f64; 3]) -> Quaternion) -> Self {
        BoundaryData { grid: domain.grid, values: domain.boundary_faces.iter().map(|fc| f(fc.center)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|q| *q == Quaternion::ZERO)
    }
}

pub fn l2_inner(u: &QField, v: &QField) -> Result<Quaternion, Error> {
    u.check_same(v)?;
    let mut acc = Quaternion::ZERO;
    for (a, b) in u.values.iter().zip(&v.values) {
        acc += a.conj() * *b;
    }
    Ok(acc * u.grid.cell_volume())
}

pub fn sc_inner(u: &QField, v: &QField) -> Result<f64, Error> {
    u.check_same(v)?;
    Ok(u.dot(v) * u.grid.cell_volume())
}

pub fn l2_norm(u: &QField) -> f64 {
    (u.dot(u) * u.grid.cell_volume()).sqrt()
}

/// `sqrt(||u||^2 + sum_i ||d_i u||^2)` with forward differences.
pub fn h1_norm(u: &QField) -> f64 {
    let mut s = u.dot(u);
    for a in 0..3 {
        let d = u.diff_fwd(a);
        s += d.dot(&d);
    }
    (s * u.grid.cell_volume()).sqrt()
}

pub fn lq_norm(u: &QField, q: f64) -> Result<f64, Error> {
    if !(q == 2.0 || (q > 1.0 && q < 1.5)) {
        return Err(Error::ExponentOutOfRange(q));
    }
    let mut acc = 0.0;
    for v in &u.values {
        acc += v.norm().powf(q);
    }
    Ok((acc * u.grid.cell_volume()).powf(1.0 / q))
}

/// Value of the cell adjacent to each boundary face.
pub fn trace_boundary(domain: &VoxelDomain, u: &QField) -> Result<BoundaryData, Error> {
    if u.grid != domain.grid {
        return Err(Error::DomainMismatch);
    }
    Ok(BoundaryData { grid: domain.grid, values: domain.boundary_faces.iter().map(|f| u.values[f.cell]).collect() })
}

/// Zeroes every cell of the one-cell boundary collar.
pub fn zero_boundary(u: &QField) -> QField {
    let g = u.grid;
    let values = u.values.iter().enumerate().map(|(c, &q)| if g.in_collar(c) { Quaternion::ZERO } else { q }).collect();
    QField { grid: g, values }
}
