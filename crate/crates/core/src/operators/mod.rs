//! The discrete operator calculus on a voxel domain.

pub mod difference;
pub mod integral;

use std::sync::OnceLock;

pub use difference::{
    dirac_bwd, dirac_fwd, dirac_fwd_adjoint, dirichlet_data_rhs, dirichlet_laplacian, div_fwd, div_fwd_adjoint,
    grad_bwd, laplacian,
};

use crate::grid::{l2_norm, zero_boundary, BoundaryData, QField, VoxelDomain};
use crate::linalg::{cg, cg_with_floor, power_iteration, CgInfo, PowerInfo};
use crate::quaternion::Quaternion;
use crate::Error;
use integral::{cauchy_with, teodorescu_table, teodorescu_with, KernelTable};

/// Round-off level of a first difference of `f` (unweighted dot norm), used as an absolute
/// floor for normal-equation solves whose right side is such a difference.
pub fn roundoff_floor(f: &QField) -> f64 {
    1e3 * f64::EPSILON * f.dot(f).sqrt() / f.grid.h
}

/// Relative residual targets of the inner linear solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverTolerances {
    pub poisson: f64,
    pub projection: f64,
    pub max_iter: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances { poisson: 1e-12, projection: 1e-13, max_iter: 5000 }
    }
}

/// Immutable operator context: domain, calibrated kernel sign, and kernel table.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub domain: VoxelDomain,
    pub sigma: f64,
    pub tol: SolverTolerances,
    table: KernelTable,
}

/// Error of the right-inverse identity for both kernel signs on a fixed reference field.
/// Returns `(error with sigma = +1, error with sigma = -1)`.
pub fn calibration_errors() -> (f64, f64) {
    let d = VoxelDomain::unit_cube(12).expect("reference grid");
    let g = d.grid;
    let f = QField::from_fn(g, |x| {
        let r2 = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) + (x[2] - 0.5).powi(2);
        let b = (-r2 / 0.02).exp();
        Quaternion::new(b, 0.5 * b, -0.25 * b, 0.75 * b)
    });
    let dt = dirac_fwd(&teodorescu_with(&teodorescu_table(g, 1.0), &f));
    let mut plus = 0.0;
    let mut minus = 0.0;
    for c in 0..g.len() {
        if g.depth(c) >= 3 {
            plus += (dt[c] - f[c]).norm_sqr();
            minus += (-dt[c] - f[c]).norm_sqr();
        }
    }
    (plus.sqrt(), minus.sqrt())
}

fn calibrated_sigma() -> f64 {
    static SIGMA: OnceLock<f64> = OnceLock::new();
    *SIGMA.get_or_init(|| {
        let (plus, minus) = calibration_errors();
        if plus <= minus {
            1.0
        } else {
            -1.0
        }
    })
}

impl OperatorSet {
    pub fn new(domain: VoxelDomain) -> Self {
        Self::with_tolerances(domain, SolverTolerances::default())
    }

    pub fn with_tolerances(domain: VoxelDomain, tol: SolverTolerances) -> Self {
        let sigma = calibrated_sigma();
        let table = teodorescu_table(domain.grid, sigma);
        OperatorSet { domain, sigma, tol, table }
    }

    pub fn teodorescu(&self, f: &QField) -> QField {
        teodorescu_with(&self.table, f)
    }

    pub fn cauchy(&self, g: &BoundaryData) -> QField {
        cauchy_with(&self.domain, self.sigma, g)
    }

    /// Solves `-dirichlet_laplacian(w) = rhs` componentwise.
    pub fn poisson_dirichlet(&self, rhs: &QField) -> Result<(QField, CgInfo), Error> {
        cg(|w| dirichlet_laplacian(w).scale(-1.0), rhs, self.tol.poisson, self.tol.max_iter, "poisson_dirichlet")
    }

    /// Discrete harmonic extension of wall values.
    pub fn harmonic_extension(&self, data: &BoundaryData) -> Result<QField, Error> {
        let b = dirichlet_data_rhs(&self.domain, data);
        Ok(self.poisson_dirichlet(&b)?.0)
    }

    /// Potential `w` (zero on the collar) with `D+ w` the orthogonal projection of `f` onto `D+ V0`.
    pub fn bergman_potential(&self, f: &QField) -> Result<(QField, CgInfo), Error> {
        let b = zero_boundary(&dirac_fwd_adjoint(f));
        cg_with_floor(
            |w| zero_boundary(&dirac_fwd_adjoint(&dirac_fwd(w))),
            &b,
            self.tol.projection,
            roundoff_floor(f),
            self.tol.max_iter,
            "bergman_Q",
        )
    }

    pub fn bergman_q(&self, f: &QField) -> Result<QField, Error> {
        Ok(dirac_fwd(&self.bergman_potential(f)?.0))
    }

    pub fn bergman_p(&self, f: &QField) -> Result<QField, Error> {
        Ok(f.sub(&self.bergman_q(f)?))
    }

    /// `T Q T f`
    pub fn tqt(&self, f: &QField) -> Result<QField, Error> {
        Ok(self.teodorescu(&self.bergman_q(&self.teodorescu(f))?))
    }

    /// Smallest eigenvalue of the discrete Dirichlet `-Delta` by inverse power iteration.
    pub fn lambda_min(&self) -> Result<f64, Error> {
        lambda_min(&self.domain, self.tol)
    }

    /// Power-iteration estimate of `||T Q T||` on L^2.
    pub fn op_norm_tqt(&self, max_iter: usize, rel_tol: f64) -> Result<PowerInfo, Error> {
        let g = self.domain.grid;
        let start = crate::sampling::random_smooth_field(g, 2, false, &mut crate::sampling::rng(0x5eed));
        let failure: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
        // T and Q are symmetric, so (TQT)^T (TQT) = TQT TQT
        let apply = |v: &QField| match self.tqt(v).and_then(|w| self.tqt(&w)) {
            Ok(w) => w,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                QField::zeros(g)
            }
        };
        let info = power_iteration(apply, &start, max_iter, rel_tol);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(PowerInfo { value: info.value.max(0.0).sqrt(), ..info })
    }
}

pub fn lambda_min(domain: &VoxelDomain, tol: SolverTolerances) -> Result<f64, Error> {
    let g = domain.grid;
    let a = |w: &QField| dirichlet_laplacian(w).scale(-1.0);
    let mut v = QField::constant(g, Quaternion::ONE);
    v = v.scale(1.0 / l2_norm(&v));
    let mut lam = 0.0;
    for it in 0..500 {
        let (w, _) = cg(a, &v, tol.poisson, tol.max_iter, "lambda_min")?;
        let wn = l2_norm(&w);
        v = w.scale(1.0 / wn);
        let next = v.dot(&a(&v)) / v.dot(&v);
        if it > 0 && ((next - lam) / next).abs() <= 1e-10 {
            return Ok(next);
        }
        lam = next;
    }
    Err(Error::NoConvergence { what: "lambda_min", iterations: 500, residual: f64::NAN })
}
