//! Pressure from the scalar equation `Sc(Q p) = rhs`.

use crate::grid::QField;
use crate::linalg::cg;
use crate::mhd::zero_mean;
use crate::operators::OperatorSet;
use crate::Error;

/// Relative residual target of the normal equations.
pub const PRESSURE_TOL: f64 = 1e-10;

/// `p -> Sc(Q p)` on scalar fields. Symmetric positive semidefinite, since `Q` is an
/// orthogonal projection and taking the scalar part is one too.
pub fn sc_q(p: &QField, ops: &OperatorSet) -> Result<QField, Error> {
    Ok(ops.bergman_q(&p.sc_part())?.sc_part())
}

/// Zero-mean least-squares solution of `Sc(Q p) = rhs`.
pub fn pressure_recover(rhs: &QField, ops: &OperatorSet) -> Result<QField, Error> {
    pressure_recover_from(rhs, &QField::zeros(rhs.grid), ops)
}

/// As [`pressure_recover`], with CG started at the zero-mean part of `init`.
///
/// Minimises over zero-mean fields by CG on `Z A A Z p = Z A rhs`, `Z` the mean removal.
/// From a zero start CG stays in the range of `Z A`, which gives the minimum-norm
/// minimiser. Constants are not in the discrete null space of `A` (the boundary
/// fallback rows break the telescoping sum), so the constraint is imposed, not recovered.
pub fn pressure_recover_from(rhs: &QField, init: &QField, ops: &OperatorSet) -> Result<QField, Error> {
    if !rhs.is_scalar() {
        return Err(Error::NotScalar("pressure_recover rhs"));
    }
    rhs.check_same(init)?;
    let failure = std::cell::RefCell::new(None);
    let apply = |x: &QField| match sc_q(x, ops) {
        Ok(y) => y,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            QField::zeros(x.grid)
        }
    };
    let x0 = zero_mean(init);
    let b = zero_mean(&apply(&rhs.sub(&apply(&x0))));
    let result = cg(|x| zero_mean(&apply(&apply(&zero_mean(x)))), &b, PRESSURE_TOL, 2000, "pressure_recover");
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (d, _) = result?;
    Ok(zero_mean(&x0.add(&d)))
}
