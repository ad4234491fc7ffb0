//! Difference operators: discrete Dirac operators, their exact transpose, and Laplacians.

use crate::grid::{BoundaryData, Grid, QField, VoxelDomain};
use crate::quaternion::Quaternion;

/// `D+ u = sum_i e_i (u(x + h e_i) - u(x)) / h`, backward difference on the last layer.
pub fn dirac_fwd(u: &QField) -> QField {
    let mut out = QField::zeros(u.grid);
    for a in 0..3 {
        let d = u.diff_fwd(a);
        for (o, q) in out.values.iter_mut().zip(&d.values) {
            *o += q.left_unit(a);
        }
    }
    out
}

/// `D- u = sum_i e_i (u(x) - u(x - h e_i)) / h`, forward difference on the first layer.
pub fn dirac_bwd(u: &QField) -> QField {
    let mut out = QField::zeros(u.grid);
    for a in 0..3 {
        let d = u.diff_bwd(a);
        for (o, q) in out.values.iter_mut().zip(&d.values) {
            *o += q.left_unit(a);
        }
    }
    out
}

/// Exact transpose of `dirac_fwd` under the componentwise dot product
/// (and hence under `sc_inner`), boundary rows included.
pub fn dirac_fwd_adjoint(r: &QField) -> QField {
    let g = r.grid;
    let inv_h = 1.0 / g.h;
    let mut out = QField::zeros(g);
    for a in 0..3 {
        let st = g.stride(a);
        for c in 0..g.len() {
            // row c of the axis-a block reads (hi - lo) / h, left-multiplied by e_a
            let (hi, lo) = if g.coords(c)[a] + 1 < g.n[a] { (c + st, c) } else { (c, c - st) };
            // transpose of left multiplication by e_a is left multiplication by -e_a
            let t = (-r.values[c]).left_unit(a) * inv_h;
            out.values[hi] += t;
            out.values[lo] -= t;
        }
    }
    out
}

/// Forward divergence of the vector part, `-Sc(D+ u)`.
pub fn div_fwd(u: &QField) -> QField {
    dirac_fwd(u).map(|q| Quaternion::scalar(-q.s))
}

/// Exact transpose of `div_fwd` restricted to vector fields: maps a scalar field to a pure field.
pub fn div_fwd_adjoint(phi: &QField) -> QField {
    let g = phi.grid;
    let inv_h = 1.0 / g.h;
    let mut out = QField::zeros(g);
    for a in 0..3 {
        let st = g.stride(a);
        for c in 0..g.len() {
            let (hi, lo) = if g.coords(c)[a] + 1 < g.n[a] { (c + st, c) } else { (c, c - st) };
            let t = phi.values[c].s * inv_h;
            let mut e = Quaternion::ZERO;
            match a {
                0 => e.v1 = t,
                1 => e.v2 = t,
                _ => e.v3 = t,
            }
            out.values[hi] += e;
            out.values[lo] -= e;
        }
    }
    out
}

/// Backward gradient of the scalar part, as a pure field, with zero values outside the box.
/// For collar-zero `phi` this is `-div_fwd_adjoint(phi)`.
pub fn grad_bwd(phi: &QField) -> QField {
    let g = phi.grid;
    let inv_h = 1.0 / g.h;
    let values = (0..g.len())
        .map(|c| {
            let ijk = g.coords(c);
            let mut v = [0.0; 3];
            for (a, va) in v.iter_mut().enumerate() {
                let lo = if ijk[a] > 0 { phi.values[c - g.stride(a)].s } else { 0.0 };
                *va = (phi.values[c].s - lo) * inv_h;
            }
            Quaternion::pure(v)
        })
        .collect();
    QField { grid: g, values }
}

/// `-D-(D+ u)`, the discrete counterpart of `Delta = -D^2`.
pub fn laplacian(u: &QField) -> QField {
    dirac_bwd(&dirac_fwd(u)).scale(-1.0)
}

/// 7-point Laplacian with a homogeneous Dirichlet wall on the cube faces
/// (ghost value `-u` outside every boundary face).
pub fn dirichlet_laplacian(u: &QField) -> QField {
    let g = u.grid;
    let inv_h2 = 1.0 / (g.h * g.h);
    let values = (0..g.len())
        .map(|c| {
            let ijk = g.coords(c);
            let uc = u.values[c];
            let mut acc = Quaternion::ZERO;
            for a in 0..3 {
                let st = g.stride(a);
                let lo = if ijk[a] > 0 { u.values[c - st] } else { -uc };
                let hi = if ijk[a] + 1 < g.n[a] { u.values[c + st] } else { -uc };
                acc += lo + hi - uc * 2.0;
            }
            acc * inv_h2
        })
        .collect();
    QField { grid: g, values }
}

/// Right-hand side contribution of wall values `h` to `-dirichlet_laplacian(w) = b`,
/// so that the ghost becomes `2 h - u`.
pub fn dirichlet_data_rhs(domain: &VoxelDomain, data: &BoundaryData) -> QField {
    let g: Grid = domain.grid;
    let mut out = QField::zeros(g);
    let s = 2.0 / (g.h * g.h);
    for (f, &v) in domain.boundary_faces.iter().zip(&data.values) {
        out.values[f.cell] += v * s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sc_inner;
    use crate::sampling::{random_field, rng};

    fn grid(n: usize) -> Grid {
        VoxelDomain::unit_cube(n).unwrap().grid
    }

    #[test]
    fn constants_vanish() {
        let g = grid(6);
        let c = QField::constant(g, Quaternion::new(1.0, -2.0, 3.0, 0.5));
        assert_eq!(dirac_fwd(&c).max_abs(), 0.0);
        assert_eq!(dirac_bwd(&c).max_abs(), 0.0);
        assert_eq!(laplacian(&c).max_abs(), 0.0);
    }

    #[test]
    fn linear_examples() {
        let g = grid(8);
        let u = QField::from_fn(g, |x| Quaternion::pure([x[0], 0.0, 0.0]));
        for q in dirac_fwd(&u).values {
            assert!((q - Quaternion::scalar(-1.0)).norm() < 1e-12);
        }
        let u = QField::from_fn(g, |x| Quaternion::pure([x[1], 0.0, 0.0]));
        for q in dirac_fwd(&u).values {
            assert!((q - Quaternion::new(0.0, 0.0, 0.0, -1.0)).norm() < 1e-12);
        }
        // curl(x2, 0, 0) = (0, 0, -1), computed componentwise
        let d2 = u.diff_fwd(1);
        assert!((d2[g.index(3, 3, 3)].v1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_laplacian() {
        let g = grid(8);
        let u = QField::from_fn(g, |x| Quaternion::scalar(x[0] * x[0]));
        let l = laplacian(&u);
        for c in 0..g.len() {
            if !g.in_collar(c) {
                assert!((l[c] - Quaternion::scalar(2.0)).norm() < 1e-9, "{:?}", l[c]);
            }
        }
    }

    #[test]
    fn adjoint_is_exact_transpose() {
        let g = grid(5);
        let mut r = rng(7);
        let u = random_field(g, &mut r);
        let v = random_field(g, &mut r);
        let a = dirac_fwd(&u).dot(&v);
        let b = u.dot(&dirac_fwd_adjoint(&v));
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        let phi = random_field(g, &mut r).sc_part();
        let w = random_field(g, &mut r).vec_part();
        let a = div_fwd(&w).dot(&phi);
        let b = w.dot(&div_fwd_adjoint(&phi));
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn adjoint_pairing_interior() {
        let g = grid(7);
        let mut r = rng(3);
        let u = crate::grid::zero_boundary(&random_field(g, &mut r));
        let v = crate::grid::zero_boundary(&random_field(g, &mut r));
        let a = sc_inner(&dirac_fwd(&u), &v).unwrap();
        let b = sc_inner(&u, &dirac_bwd(&v)).unwrap();
        let s = crate::grid::l2_norm(&u) * crate::grid::l2_norm(&v);
        assert!((a - b).abs() <= 1e-12 * s);
    }

    #[test]
    fn collar_gradient_is_div_adjoint() {
        let g = grid(6);
        let phi = crate::grid::zero_boundary(&random_field(g, &mut rng(9)).sc_part());
        let a = div_fwd_adjoint(&phi);
        let b = grad_bwd(&phi).scale(-1.0);
        assert!(a.sub(&b).max_abs() < 1e-12);
    }

    #[test]
    fn dirichlet_eigenfunction() {
        let n = 8;
        let g = grid(n);
        let pi = std::f64::consts::PI;
        let u = QField::from_fn(g, |x| Quaternion::scalar((pi * x[0]).sin() * (pi * x[1]).sin() * (pi * x[2]).sin()));
        let lam = 3.0 * 4.0 / (g.h * g.h) * (pi * g.h / 2.0).sin().powi(2);
        let l = dirichlet_laplacian(&u);
        assert!(l.add(&u.scale(lam)).max_abs() < 1e-10);
    }
}
