//! The Schauder map `G: (u~, B~) -> (u, B)` with each linear solve by a Neumann series.

use crate::mhd::{boundary_lift, tqt_rhs_p_with, Coefficients, MHDParams, MHDState};
use crate::grid::QField;
use crate::operators::OperatorSet;
use crate::Error;

use super::neumann::{neumann_apply_b, neumann_apply_u, NeumannInfo};
use super::pressure::pressure_recover;
use super::{outer_loop, ConstantsBundle, ConvergenceReport, IterationRecord, Method, SolverConfig, StepOutput};

/// One application of `G`. The Lorentz and pressure rows use `B~` in both slots, so `G`
/// is explicit; the lift enters inside the inverted operator so that fixed points of `G`
/// and of the Banach scheme coincide.
pub fn schauder_map(
    tilde: &MHDState,
    params: &MHDParams,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    k: Coefficients,
    lift: &QField,
) -> Result<(MHDState, NeumannInfo, NeumannInfo), Error> {
    let p = pressure_recover(&tqt_rhs_p_with(tilde, params, ops, k)?, ops)?;
    let (u, i1) = neumann_apply_u(tilde, &tilde.b, &p, params, ops, cfg, k)?;
    let (b, i2) = neumann_apply_b(tilde, &u, lift, ops, cfg, k)?;
    Ok((MHDState { u, b, p }, i1, i2))
}

pub fn schauder_solve_observed(
    params: &MHDParams,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    consts: &ConstantsBundle,
    init: &MHDState,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<(MHDState, ConvergenceReport), Error> {
    let k = cfg.coefficients_for(params);
    let lift = boundary_lift(&params.boundary_h, ops)?;
    outer_loop(Method::SchauderNeumann, params, cfg, consts, init, observer, |tilde| {
        let (state, i1, i2) = schauder_map(tilde, params, ops, cfg, k, &lift)?;
        Ok(StepOutput { state, q1: i1.q, q2: i2.q, inner_iterations: i1.terms.max(i2.terms), inner_ratio: i1.q.max(i2.q) })
    })
}

pub fn schauder_solve(
    params: &MHDParams,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    consts: &ConstantsBundle,
    init: &MHDState,
) -> Result<(MHDState, ConvergenceReport), Error> {
    schauder_solve_observed(params, ops, cfg, consts, init, &mut |_| {})
}
