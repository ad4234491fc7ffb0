//! The Banach iteration: pressure, velocity, then the magnetic field by an inner loop.

use crate::grid::{h1_norm, QField};
use crate::mhd::{boundary_lift, convective, leray_project, tqt_rhs_p_with, tqt_rhs_u_with, Coefficients, MHDParams, MHDState};
use crate::operators::OperatorSet;
use crate::Error;

use super::pressure::pressure_recover;
use super::{outer_loop, ConstantsBundle, ConvergenceReport, IterationRecord, Method, SolverConfig, StepOutput};

#[derive(Clone, Debug, PartialEq)]
pub struct InnerReport {
    pub b: QField,
    pub iterations: usize,
    /// Largest measured `||B^(i) - B^(i-1)|| / ||B^(i-1) - B^(i-2)||` (H1), 0 if never measured.
    pub ratio: f64,
    pub ratios: Vec<f64>,
    pub converged: bool,
}

/// `L Vec(c_b TQT[(B.grad)u - (u.grad)B] + lift)`, `L` the Leray projection when enabled.
pub fn inner_map(b: &QField, u: &QField, lift: &QField, ops: &OperatorSet, cfg: &SolverConfig, c_b: f64) -> Result<QField, Error> {
    let bracket = convective(b, u)?.sub(&convective(u, b)?);
    let next = ops.tqt(&bracket)?.scale(c_b).vec_part().add(lift);
    if cfg.leray_each_step {
        leray_project(&next, ops)
    } else {
        Ok(next)
    }
}

/// Inner fixed-point loop for `B_n` at fixed `u_n`. Non-convergence is reported, not raised.
pub fn banach_inner_b_with(
    u: &QField,
    b_init: &QField,
    lift: &QField,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    c_b: f64,
) -> Result<InnerReport, Error> {
    if !u.is_pure() {
        return Err(Error::NotPure("banach_inner_b u"));
    }
    let mut b = b_init.clone();
    let mut prev_d = f64::NAN;
    let mut ratios = Vec::new();
    for i in 1..=cfg.max_inner {
        let next = inner_map(&b, u, lift, ops, cfg, c_b)?;
        let d = h1_norm(&next.sub(&b));
        let nn = h1_norm(&next);
        // ratios of differences near round-off carry no information
        if prev_d > 1e-12 * nn {
            ratios.push(d / prev_d);
        }
        b = next;
        if d <= cfg.tol * nn {
            let ratio = ratios.iter().copied().fold(0.0, f64::max);
            return Ok(InnerReport { b, iterations: i, ratio, ratios, converged: true });
        }
        prev_d = d;
    }
    let ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(InnerReport { b, iterations: cfg.max_inner, ratio, ratios, converged: false })
}

/// [`banach_inner_b_with`] with the lift of `params.boundary_h` and the configured `Rm` prefactor.
pub fn banach_inner_b(u: &QField, b_init: &QField, params: &MHDParams, ops: &OperatorSet, cfg: &SolverConfig) -> Result<InnerReport, Error> {
    let lift = boundary_lift(&params.boundary_h, ops)?;
    banach_inner_b_with(u, b_init, &lift, ops, cfg, cfg.coefficients_for(params).b)
}

/// One outer step: `p_n` from the previous iterate, then `u_n`, then `B_n`.
pub fn banach_step(
    prev: &MHDState,
    params: &MHDParams,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    k: Coefficients,
    lift: &QField,
) -> Result<(MHDState, InnerReport), Error> {
    let p = pressure_recover(&tqt_rhs_p_with(prev, params, ops, k)?, ops)?;
    let with_p = MHDState { u: prev.u.clone(), b: prev.b.clone(), p };
    let mut u = tqt_rhs_u_with(&with_p, params, ops, k)?.vec_part();
    if cfg.leray_each_step {
        u = leray_project(&u, ops)?;
    }
    let inner = banach_inner_b_with(&u, &prev.b, lift, ops, cfg, k.b)?;
    Ok((MHDState { u, b: inner.b.clone(), p: with_p.p }, inner))
}

pub fn banach_solve_observed(
    params: &MHDParams,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    consts: &ConstantsBundle,
    init: &MHDState,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<(MHDState, ConvergenceReport), Error> {
    let k = cfg.coefficients_for(params);
    let lift = boundary_lift(&params.boundary_h, ops)?;
    outer_loop(Method::Banach, params, cfg, consts, init, observer, |prev| {
        let (state, inner) = banach_step(prev, params, ops, cfg, k, &lift)?;
        Ok(StepOutput { state, q1: f64::NAN, q2: f64::NAN, inner_iterations: inner.iterations, inner_ratio: inner.ratio })
    })
}

pub fn banach_solve(
    params: &MHDParams,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    consts: &ConstantsBundle,
    init: &MHDState,
) -> Result<(MHDState, ConvergenceReport), Error> {
    banach_solve_observed(params, ops, cfg, consts, init, &mut |_| {})
}
