//! Fixed-point solvers for the stationary MHD system: the Banach iteration with an inner
//! B-loop, and the Schauder map realised through Neumann series.

pub mod banach;
pub mod conditions;
pub mod constants;
pub mod neumann;
pub mod pressure;
pub mod schauder;

use serde::{Deserialize, Serialize};

use crate::energy::{energy, EnergyReport};
use crate::grid::{h1_norm, l2_norm};
use crate::mhd::{residual_strong, Coefficients, MHDParams, MHDState, StrongResidual};
use crate::operators::OperatorSet;
use crate::Error;

pub use banach::{banach_inner_b, banach_solve, banach_solve_observed, InnerReport};
pub use conditions::{check_cond1, check_schauder_bound, check_theorem4, lipschitz_ln, Theorem4};
pub use constants::{estimate_constants, ConstantsBundle, Provenance};
pub use neumann::{neumann_apply_b, neumann_apply_u, NeumannInfo};
pub use pressure::pressure_recover;
pub use schauder::{schauder_solve, schauder_solve_observed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Banach,
    SchauderNeumann,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Banach => "banach",
            Method::SchauderNeumann => "schauder_neumann",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    /// Relative change of `(u, B)` in H1 below which the outer loop stops.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub neumann_max_terms: usize,
    pub neumann_term_tol: f64,
    pub leray_each_step: bool,
    /// Replaces the method's default prefactors.
    pub coefficients: Option<Coefficients>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Banach,
            tol: 1e-8,
            max_outer: 500,
            max_inner: 200,
            neumann_max_terms: 64,
            neumann_term_tol: 1e-12,
            leray_each_step: true,
            coefficients: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.tol > 0.0) || !(self.neumann_term_tol >= 0.0) {
            return Err(Error::Precondition("solver tolerances must be positive".into()));
        }
        if self.max_outer < 1 || self.max_inner < 1 || self.neumann_max_terms < 1 {
            return Err(Error::Precondition("solver iteration limits must be at least 1".into()));
        }
        Ok(())
    }

    /// Prefactors used by the configured method.
    pub fn coefficients_for(&self, params: &MHDParams) -> Coefficients {
        self.coefficients.unwrap_or(match self.method {
            Method::Banach => banach_coefficients(params),
            Method::SchauderNeumann => schauder_coefficients(params),
        })
    }
}

/// The Banach iteration as displayed: `Re` on the nonlinear and pressure-row terms,
/// `Re^2` on the pressure gradient, `Rm^2` on the induction row.
pub fn banach_coefficients(params: &MHDParams) -> Coefficients {
    let (re, rm) = (params.re, params.rm);
    Coefficients { u_nonlinear: re, u_pressure: re * re, p: re, b: rm * rm }
}

/// The modified system behind the Schauder map: `Re^2` and `Rm^2` throughout, unit pressure row.
pub fn schauder_coefficients(params: &MHDParams) -> Coefficients {
    let (re, rm) = (params.re, params.rm);
    Coefficients { u_nonlinear: re * re, u_pressure: re * re, p: 1.0, b: rm * rm }
}

/// One outer step as logged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `||u_n - u_{n-1}||_H1`
    pub du: f64,
    pub db: f64,
    /// `||p_n - p_{n-1}||_L2`
    pub dp: f64,
    pub q1: f64,
    pub q2: f64,
    /// NaN until two earlier iterates exist.
    pub ln: f64,
    pub cond1: bool,
    pub thm2: bool,
    pub thm4: bool,
    pub energy: EnergyReport,
    pub residual: StrongResidual,
    pub u_h1: f64,
    pub b_h1: f64,
    pub p_l2: f64,
    pub c3: f64,
    pub c4: f64,
    pub f: f64,
    pub w: f64,
    /// Relative change of `(u, B)`, compared with `tol`.
    pub change: f64,
    pub inner_iterations: usize,
    pub inner_ratio: f64,
}

fn flag(b: bool) -> u8 {
    b as u8
}

impl IterationRecord {
    pub const CSV_HEADER: &'static str = "iter,du,dB,dp,q1,q2,Ln,cond1,thm2,thm4,Jenergy,res_mom,res_ind,divu,divB";

    pub fn csv_row(&self) -> String {
        let r = &self.residual;
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.iter,
            self.du,
            self.db,
            self.dp,
            self.q1,
            self.q2,
            self.ln,
            flag(self.cond1),
            flag(self.thm2),
            flag(self.thm4),
            self.energy.j,
            r.momentum_rel(),
            r.induction_rel(),
            r.div_u_rel(),
            r.div_b_rel()
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub state_changes: Vec<f64>,
    /// Largest measured Neumann ratios (NaN for the Banach scheme).
    pub q1: f64,
    pub q2: f64,
    pub ln: Vec<f64>,
    /// Conditions held at every outer step.
    pub cond1_ok: bool,
    pub theorem2_ok: bool,
    pub theorem4_ok: bool,
    /// Last values of the running quantities.
    pub f_const: f64,
    pub c3: f64,
    pub c4: f64,
    pub w: f64,
    pub final_residuals: StrongResidual,
    pub records: Vec<IterationRecord>,
    pub init_u_h1: f64,
    pub init_b_h1: f64,
    pub constants: ConstantsBundle,
}

/// `(C3, C4, F)` at step `n` from H1 norm histories indexed from the initial state.
pub fn running_quantities(u_norms: &[f64], b_norms: &[f64], n: usize, cs: f64) -> Option<(f64, f64, f64)> {
    if n < 2 || n >= u_norms.len() {
        return None;
    }
    let c3 = u_norms[n - 1] + u_norms[n - 2];
    let c4 = b_norms[n - 1] + b_norms[n - 2];
    let f = 2.0 * cs * (b_norms[n] + b_norms[n - 1]);
    Some((c3, c4, f))
}

impl ConvergenceReport {
    fn norm_history(&self) -> (Vec<f64>, Vec<f64>) {
        let mut u = vec![self.init_u_h1];
        let mut b = vec![self.init_b_h1];
        u.extend(self.records.iter().map(|r| r.u_h1));
        b.extend(self.records.iter().map(|r| r.b_h1));
        (u, b)
    }

    /// `L_n` re-evaluated from the logged norm history.
    pub fn ln_from_history(&self, params: &MHDParams) -> Vec<f64> {
        let (u, b) = self.norm_history();
        (1..u.len())
            .map(|n| match running_quantities(&u, &b, n, self.constants.cs) {
                Some((c3, c4, f)) => lipschitz_ln(&self.constants, c3, c4, f, params),
                None => f64::NAN,
            })
            .collect()
    }

    /// Ratios `du_n / du_{n-1}` paired with `L_n`, for steps where both are defined.
    pub fn contraction_pairs(&self) -> Vec<(f64, f64)> {
        self.records
            .windows(2)
            .filter(|w| w[0].du > 0.0 && w[1].ln.is_finite())
            .map(|w| (w[1].du / w[0].du, w[1].ln))
            .collect()
    }

    pub fn max_ln(&self) -> f64 {
        self.ln.iter().copied().filter(|x| x.is_finite()).fold(f64::NAN, f64::max)
    }

    /// Whether the state changes never increase after the first step.
    pub fn tail_monotone(&self) -> bool {
        self.state_changes.iter().skip(1).collect::<Vec<_>>().windows(2).all(|w| w[1] <= w[0])
    }

    /// Largest logged `||B||_H1` stays within ten times the first nonzero value.
    pub fn b_bounded(&self) -> bool {
        let Some(first) = self.records.iter().map(|r| r.b_h1).find(|&x| x > 0.0) else {
            return true;
        };
        self.records.iter().all(|r| r.b_h1 <= 10.0 * first)
    }
}

/// Result of one outer map application.
pub(crate) struct StepOutput {
    pub state: MHDState,
    pub q1: f64,
    pub q2: f64,
    pub inner_iterations: usize,
    pub inner_ratio: f64,
}

/// `sqrt(||u||^2_H1 + ||B||^2_H1)`
fn pair_norm(u_h1: f64, b_h1: f64) -> f64 {
    (u_h1 * u_h1 + b_h1 * b_h1).sqrt()
}

pub(crate) fn outer_loop(
    method: Method,
    params: &MHDParams,
    cfg: &SolverConfig,
    consts: &ConstantsBundle,
    init: &MHDState,
    observer: &mut dyn FnMut(&IterationRecord),
    mut step: impl FnMut(&MHDState) -> Result<StepOutput, Error>,
) -> Result<(MHDState, ConvergenceReport), Error> {
    cfg.validate()?;
    consts.validate()?;
    init.validate()?;
    let mut u_norms = vec![h1_norm(&init.u)];
    let mut b_norms = vec![h1_norm(&init.b)];
    let mut sup_b = b_norms[0];
    let mut reference = Some(pair_norm(u_norms[0], b_norms[0])).filter(|&x| x > 0.0);
    let mut state = init.clone();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut increases = 0;
    let mut converged = false;

    for n in 1..=cfg.max_outer {
        let out = step(&state)?;
        let new = out.state;
        let du = h1_norm(&new.u.sub(&state.u));
        let db = h1_norm(&new.b.sub(&state.b));
        let dp = l2_norm(&new.p.sub(&state.p));
        let u_h1 = h1_norm(&new.u);
        let b_h1 = h1_norm(&new.b);
        u_norms.push(u_h1);
        b_norms.push(b_h1);
        sup_b = sup_b.max(b_h1);
        let (c3, c4, f) = running_quantities(&u_norms, &b_norms, n, consts.cs).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        let ln = if c3.is_nan() { f64::NAN } else { lipschitz_ln(consts, c3, c4, f, params) };
        let (thm4, w) = conditions::theorem4_flag(consts, params, sup_b);
        let norm = pair_norm(u_h1, b_h1);
        let step_change = pair_norm(du, db);
        let change = if norm > 0.0 {
            step_change / norm
        } else if step_change == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let record = IterationRecord {
            iter: n,
            du,
            db,
            dp,
            q1: out.q1,
            q2: out.q2,
            ln,
            cond1: check_cond1(u_h1, consts, params.rm),
            thm2: check_schauder_bound(u_h1, consts, params),
            thm4,
            energy: energy(&new.u, &new.b, params, consts.cs)?,
            residual: residual_strong(&new, params)?,
            u_h1,
            b_h1,
            p_l2: l2_norm(&new.p),
            c3,
            c4,
            f,
            w,
            change,
            inner_iterations: out.inner_iterations,
            inner_ratio: out.inner_ratio,
        };
        observer(&record);
        if let Some(prev) = records.last() {
            if change > prev.change {
                increases += 1;
            } else {
                increases = 0;
            }
        }
        records.push(record);
        if !norm.is_finite() {
            return Err(Error::Divergence { iteration: n, norm, reference: reference.unwrap_or(0.0) });
        }
        match reference {
            Some(r) if norm > 1e3 * r => return Err(Error::Divergence { iteration: n, norm, reference: r }),
            None if norm > 0.0 => reference = Some(norm),
            _ => {}
        }
        if increases >= 5 {
            return Err(Error::Stagnation { iteration: n });
        }
        state = new;
        if change <= cfg.tol {
            converged = true;
            break;
        }
    }

    let last = *records.last().expect("max_outer >= 1");
    let all = |f: fn(&IterationRecord) -> bool| records.iter().all(f);
    let max_of = |f: fn(&IterationRecord) -> f64| records.iter().map(f).fold(f64::NAN, f64::max);
    let report = ConvergenceReport {
        method,
        iterations: records.len(),
        converged,
        state_changes: records.iter().map(|r| r.change).collect(),
        q1: max_of(|r| r.q1),
        q2: max_of(|r| r.q2),
        ln: records.iter().map(|r| r.ln).collect(),
        cond1_ok: all(|r| r.cond1),
        theorem2_ok: all(|r| r.thm2),
        theorem4_ok: all(|r| r.thm4),
        f_const: last.f,
        c3: last.c3,
        c4: last.c4,
        w: last.w,
        final_residuals: last.residual,
        init_u_h1: u_norms[0],
        init_b_h1: b_norms[0],
        records,
        constants: *consts,
    };
    Ok((state, report))
}

/// Runs the configured method.
pub fn solve(
    params: &MHDParams,
    ops: &OperatorSet,
    cfg: &SolverConfig,
    consts: &ConstantsBundle,
    init: &MHDState,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<(MHDState, ConvergenceReport), Error> {
    match cfg.method {
        Method::Banach => banach_solve_observed(params, ops, cfg, consts, init, observer),
        Method::SchauderNeumann => schauder_solve_observed(params, ops, cfg, consts, init, observer),
    }
}
