//! Truncated Neumann series for `(I + A) v = r` and the ratio estimate `q = ||A||`.

use crate::grid::QField;
use crate::linalg::power_iteration;
use crate::mhd::{convective, convective_adjoint, leray_project, lorentz_mixed, Coefficients, MHDParams, MHDState};
use crate::operators::dirac_fwd;
use crate::operators::OperatorSet;
use crate::sampling::{random_smooth_field, rng};
use crate::Error;

use super::SolverConfig;

/// Power-iteration budget for the ratio estimates.
pub const RATIO_MAX_ITER: usize = 30;
pub const RATIO_REL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeumannInfo {
    /// Number of series terms summed, the zeroth included.
    pub terms: usize,
    pub last_term_norm: f64,
    pub q: f64,
}

/// `sum_{n < N} (-A)^n r`, stopping once a term drops below `term_tol * ||r||`.
pub fn neumann_series(apply: impl Fn(&QField) -> QField, r: &QField, max_terms: usize, term_tol: f64) -> (QField, usize, f64) {
    let rn = r.dot(r).sqrt();
    let mut sum = r.clone();
    let mut term = r.clone();
    let mut tn = rn;
    let mut terms = 1;
    while terms < max_terms && tn > term_tol * rn {
        term = apply(&term).scale(-1.0);
        tn = term.dot(&term).sqrt();
        sum = sum.add(&term);
        terms += 1;
    }
    (sum, terms, tn)
}

/// The linearised convection operator `A v = L Vec(c TQT (a.grad) v)` on pure fields,
/// with `L` the Leray projection when enabled.
pub struct ConvectionOperator<'a> {
    pub a: &'a QField,
    pub c: f64,
    pub leray: bool,
    pub ops: &'a OperatorSet,
}

impl ConvectionOperator<'_> {
    pub fn apply(&self, v: &QField) -> Result<QField, Error> {
        let w = self.ops.tqt(&convective(self.a, v)?)?.scale(self.c).vec_part();
        if self.leray {
            leray_project(&w, self.ops)
        } else {
            Ok(w)
        }
    }

    /// Exact transpose of `apply` (TQT, Leray and Vec are symmetric).
    pub fn apply_transpose(&self, r: &QField) -> Result<QField, Error> {
        let r = if self.leray { leray_project(&r.vec_part(), self.ops)? } else { r.vec_part() };
        let w = self.ops.tqt(&r)?.scale(self.c);
        Ok(convective_adjoint(self.a, &w).vec_part())
    }

    /// `||A||` by power iteration on `A^T A`.
    pub fn norm_estimate(&self) -> Result<f64, Error> {
        if self.c == 0.0 || self.a.max_abs() == 0.0 {
            return Ok(0.0);
        }
        let g = self.a.grid;
        let start = random_smooth_field(g, 2, true, &mut rng(0x9e37));
        let failure = std::cell::RefCell::new(None);
        let info = power_iteration(
            |x| match self.apply(x).and_then(|y| self.apply_transpose(&y)) {
                Ok(y) => y,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    QField::zeros(g)
                }
            },
            &start,
            RATIO_MAX_ITER,
            RATIO_REL_TOL,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(info.value.max(0.0).sqrt())
    }

    /// Solves `(I + A) v = r`, refusing when the estimated `||A||` is at least one.
    pub fn solve(&self, r: &QField, cfg: &SolverConfig, which: u8) -> Result<(QField, NeumannInfo), Error> {
        let q = self.norm_estimate()?;
        if q >= 1.0 {
            return Err(Error::NeumannRatio { which, q });
        }
        if q == 0.0 {
            return Ok((r.clone(), NeumannInfo { terms: 1, last_term_norm: r.dot(r).sqrt(), q }));
        }
        let failure = std::cell::RefCell::new(None);
        let (v, terms, last) = neumann_series(
            |x| match self.apply(x) {
                Ok(y) => y,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    QField::zeros(x.grid)
                }
            },
            r,
            cfg.neumann_max_terms,
            cfg.neumann_term_tol,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok((v, NeumannInfo { terms, last_term_norm: last, q }))
    }
}

fn prepare(r: QField, cfg: &SolverConfig, ops: &OperatorSet) -> Result<QField, Error> {
    let r = r.vec_part();
    if cfg.leray_each_step {
        leray_project(&r, ops)
    } else {
        Ok(r)
    }
}

/// `u = [I + (c_nl/mu0) TQT Sc(u~ D)]^{-1} TQT[(c_nl/mu0) Vec((D B~) B) - c_p D p]`.
pub fn neumann_apply_u(
    tilde: &MHDState,
    b: &QField,
    p: &QField,
    params: &MHDParams,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    k: Coefficients,
) -> Result<(QField, NeumannInfo), Error> {
    let c = k.u_nonlinear / params.mu0;
    let lor = ops.tqt(&lorentz_mixed(&tilde.b, b, 1.0)?)?.scale(c);
    let pr = ops.tqt(&dirac_fwd(p))?.scale(k.u_pressure);
    let r = prepare(lor.sub(&pr), cfg, ops)?;
    let a = ConvectionOperator { a: &tilde.u, c, leray: cfg.leray_each_step, ops };
    a.solve(&r, cfg, 1)
}

/// `B = [I + c_b TQT Sc(u~ D)]^{-1} (c_b TQT Sc(B~ D) u + lift)`.
pub fn neumann_apply_b(
    tilde: &MHDState,
    u: &QField,
    lift: &QField,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    k: Coefficients,
) -> Result<(QField, NeumannInfo), Error> {
    let r = ops.tqt(&convective(&tilde.b, u)?)?.scale(k.b).add(lift);
    let r = prepare(r, cfg, ops)?;
    let a = ConvectionOperator { a: &tilde.u, c: k.b, leray: cfg.leray_each_step, ops };
    a.solve(&r, cfg, 2)
}
