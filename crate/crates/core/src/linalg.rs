//! Matrix-free conjugate gradients and power iteration on grid fields.

use crate::grid::QField;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgInfo {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradients for a symmetric positive (semi)definite operator.
/// Stops when `||b - A x|| <= tol * ||b||`.
pub fn cg(
    apply: impl Fn(&QField) -> QField,
    b: &QField,
    tol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<(QField, CgInfo), Error> {
    cg_with_floor(apply, b, tol, 0.0, max_iter, what)
}

/// As [`cg`], but also accepts `||b - A x|| <= floor`. A right side that is itself at the
/// round-off level of its source (for example the divergence of an already projected
/// field) then returns at once instead of chasing noise along near-null directions.
pub fn cg_with_floor(
    apply: impl Fn(&QField) -> QField,
    b: &QField,
    tol: f64,
    floor: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<(QField, CgInfo), Error> {
    let bnorm = b.dot(b).sqrt();
    let mut x = QField::zeros(b.grid);
    if bnorm == 0.0 || bnorm <= floor {
        return Ok((x, CgInfo { iterations: 0, relative_residual: if bnorm == 0.0 { 0.0 } else { 1.0 } }));
    }
    let target = (tol * bnorm).max(floor);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    for it in 0..max_iter {
        let rel = rr.sqrt() / bnorm;
        if rr.sqrt() <= target {
            return Ok((x, CgInfo { iterations: it, relative_residual: rel }));
        }
        let ap = apply(&p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        x = x.axpy(alpha, &p);
        r = r.axpy(-alpha, &ap);
        let rr_new = r.dot(&r);
        p = r.axpy(rr_new / rr, &p);
        rr = rr_new;
    }
    // recompute the true residual before giving up
    let res = b.sub(&apply(&x));
    let rel = res.dot(&res).sqrt() / bnorm;
    if rel * bnorm <= target {
        Ok((x, CgInfo { iterations: max_iter, relative_residual: rel }))
    } else {
        Err(Error::NoConvergence { what, iterations: max_iter, residual: rel })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerInfo {
    pub value: f64,
    pub iterations: usize,
    pub relative_change: f64,
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by power iteration.
pub fn power_iteration(
    apply: impl Fn(&QField) -> QField,
    start: &QField,
    max_iter: usize,
    rel_tol: f64,
) -> PowerInfo {
    let n0 = start.dot(start).sqrt();
    if n0 == 0.0 {
        return PowerInfo { value: 0.0, iterations: 0, relative_change: 0.0 };
    }
    let mut v = start.scale(1.0 / n0);
    let mut lambda = 0.0;
    let mut change = f64::INFINITY;
    for it in 1..=max_iter {
        let w = apply(&v);
        let next = v.dot(&w);
        let wn = w.dot(&w).sqrt();
        change = if next != 0.0 { ((next - lambda) / next).abs() } else { 0.0 };
        lambda = next;
        if wn == 0.0 {
            return PowerInfo { value: 0.0, iterations: it, relative_change: 0.0 };
        }
        v = w.scale(1.0 / wn);
        if change <= rel_tol {
            return PowerInfo { value: lambda, iterations: it, relative_change: change };
        }
    }
    PowerInfo { value: lambda, iterations: max_iter, relative_change: change }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::VoxelDomain;
    use crate::quaternion::Quaternion;

    #[test]
    fn cg_diagonal() {
        let g = VoxelDomain::unit_cube(3).unwrap().grid;
        let d: Vec<f64> = (0..g.len()).map(|c| 1.0 + c as f64).collect();
        let apply = |x: &QField| QField { grid: g, values: x.values.iter().zip(&d).map(|(&q, &s)| q * s).collect() };
        let b = QField::constant(g, Quaternion::new(1.0, 2.0, 0.0, -1.0));
        let (x, info) = cg(apply, &b, 1e-12, 200, "test").unwrap();
        assert!(info.relative_residual <= 1e-12);
        for c in 0..g.len() {
            assert!((x[c] * d[c] - b[c]).norm() < 1e-10);
        }
    }

    #[test]
    fn power_diagonal() {
        let g = VoxelDomain::unit_cube(2).unwrap().grid;
        let d: Vec<f64> = (0..g.len()).map(|c| 1.0 + c as f64).collect();
        let apply = |x: &QField| QField { grid: g, values: x.values.iter().zip(&d).map(|(&q, &s)| q * s).collect() };
        let start = QField::constant(g, Quaternion::ONE);
        let p = power_iteration(apply, &start, 2000, 1e-14);
        assert!((p.value - 8.0).abs() < 1e-6);
    }
}
