//! The `verify`, `constants` and `solve` commands. `main.rs` only parses arguments.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::energy::{coercivity_radius, EnergyReport};
use crate::io::{fmt_real, read_state, write_state, CsvLog};
use crate::mhd::{MHDParams, MHDState};
use crate::operators::OperatorSet;
use crate::solvers::conditions::{check_theorem4, cond1_threshold, schauder_threshold};
use crate::solvers::constants::lemma3_violations;
use crate::solvers::{estimate_constants, solve, ConstantsBundle, ConvergenceReport, IterationRecord};
use crate::verify::{run_verify, VerifyReport};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

/// Exit status for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NeumannRatio { .. } => EXIT_REFUSED,
        Error::Divergence { .. } | Error::Stagnation { .. } => EXIT_DIVERGED,
        _ => EXIT_FAILURE,
    }
}

/// Loads a config and applies the command-line overrides.
pub fn load_config(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(o) = out {
        cfg.output = o;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_output(cfg: &RunConfig) -> Result<(), Error> {
    fs::create_dir_all(&cfg.output)?;
    fs::write(cfg.output.join("config.resolved.json"), cfg.to_json() + "\n")?;
    Ok(())
}

/// Seed of the holdout sample, distinct from the estimation sample.
pub fn holdout_seed(seed: u64) -> u64 {
    seed ^ 0x5851_f42d_4c95_7f2d
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyReport, Error> {
    prepare_output(cfg)?;
    let domain = cfg.build_domain()?;
    let ops = OperatorSet::new(domain.clone());
    let report = run_verify(&domain, &ops, cfg.seed)?;
    fs::write(cfg.output.join("verify.csv"), report.csv())?;
    fs::write(cfg.output.join("verify.txt"), report.text())?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsReport {
    pub constants: ConstantsBundle,
    pub holdout_violations: usize,
    pub holdout: usize,
    pub cond1_threshold: f64,
    pub theorem2_threshold: f64,
    /// `None` when the radicand under `W` is negative at the field budget.
    pub theorem4_w: Option<f64>,
    pub theorem4_field_ok: bool,
    pub theorem4_rm2_bound: f64,
    pub theorem4_rm_ok: bool,
    pub coercivity_radius: f64,
    pub u_budget: f64,
    pub b_budget: f64,
}

impl ConstantsReport {
    /// `(quantity, value, kind)` rows.
    pub fn rows(&self) -> Vec<(&'static str, f64, &'static str)> {
        let mut rows: Vec<_> = self.constants.rows().iter().map(|&(n, v, p)| (n, v, p.as_str())).collect();
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        rows.extend([
            ("holdout_samples", self.holdout as f64, "count"),
            ("holdout_violations", self.holdout_violations as f64, "count"),
            ("u_budget", self.u_budget, "input"),
            ("b_budget", self.b_budget, "input"),
            ("cond1_threshold", self.cond1_threshold, "derived"),
            ("cond1_ok_at_budget", flag(self.u_budget < self.cond1_threshold), "derived"),
            ("theorem2_threshold", self.theorem2_threshold, "derived"),
            ("theorem2_ok_at_budget", flag(self.u_budget <= self.theorem2_threshold), "derived"),
            ("theorem4_w", self.theorem4_w.unwrap_or(f64::NAN), "derived"),
            ("theorem4_field_ok", flag(self.theorem4_field_ok), "derived"),
            ("theorem4_rm2_bound", self.theorem4_rm2_bound, "derived"),
            ("theorem4_rm_ok", flag(self.theorem4_rm_ok), "derived"),
            ("coercivity_radius", self.coercivity_radius, "derived"),
        ]);
        rows
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("quantity,value,kind\n");
        for (n, v, k) in self.rows() {
            let _ = writeln!(s, "{n},{},{k}", fmt_real(v));
        }
        s
    }

    pub fn text(&self) -> String {
        let mut s = String::from("Constants\n");
        for (n, v, p) in self.constants.rows() {
            let _ = writeln!(s, "  {n:<12} {v:<24.16e} {}", p.as_str());
        }
        let _ = writeln!(s, "Cs holdout: {} violations in {} samples", self.holdout_violations, self.holdout);
        let _ = writeln!(s, "Conditions at ||u||_H1 = {}, sup ||B||_H1 = {}", self.u_budget, self.b_budget);
        let _ = writeln!(s, "  cond1: ||u|| < {:.6e} -> {}", self.cond1_threshold, self.u_budget < self.cond1_threshold);
        let _ = writeln!(s, "  Schauder bound: ||u~|| <= {:.6e} -> {}", self.theorem2_threshold, self.u_budget <= self.theorem2_threshold);
        match self.theorem4_w {
            Some(w) => {
                let _ = writeln!(s, "  contraction pair: W = {w:.6e}, field bound {}, Rm^2 < {:.6e} -> {}", self.theorem4_field_ok, self.theorem4_rm2_bound, self.theorem4_rm_ok);
            }
            None => {
                let _ = writeln!(s, "  contraction pair: negative radicand, field budget too large");
            }
        }
        let _ = writeln!(s, "  coercivity radius: {:.6e}", self.coercivity_radius);
        s
    }
}

pub fn constants_report(cfg: &RunConfig, params: &MHDParams, ops: &OperatorSet) -> Result<ConstantsReport, Error> {
    let c = estimate_constants(&ops.domain, ops, cfg.constants.samples, cfg.seed)?;
    let holdout_violations = lemma3_violations(c.cs, ops, cfg.constants.holdout, holdout_seed(cfg.seed))?;
    let (theorem4_w, field_ok, rm2, rm_ok) = match check_theorem4(&c, params, cfg.constants.b_budget) {
        Ok(t) => (Some(t.w), t.field_ok, t.rm2_bound, t.rm_ok),
        Err(_) => (None, false, f64::NAN, false),
    };
    Ok(ConstantsReport {
        constants: c,
        holdout_violations,
        holdout: cfg.constants.holdout,
        cond1_threshold: cond1_threshold(&c, params.rm),
        theorem2_threshold: schauder_threshold(&c, params),
        theorem4_w,
        theorem4_field_ok: field_ok,
        theorem4_rm2_bound: rm2,
        theorem4_rm_ok: rm_ok,
        coercivity_radius: coercivity_radius(params.re, params.rm, params.mu0, c.cs),
        u_budget: cfg.constants.u_budget,
        b_budget: cfg.constants.b_budget,
    })
}

pub fn cmd_constants(cfg: &RunConfig) -> Result<ConstantsReport, Error> {
    prepare_output(cfg)?;
    let domain = cfg.build_domain()?;
    let params = cfg.build_params(&domain)?;
    let ops = OperatorSet::new(domain);
    let report = constants_report(cfg, &params, &ops)?;
    fs::write(cfg.output.join("constants.csv"), report.csv())?;
    fs::write(cfg.output.join("constants.txt"), report.text())?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveSummary {
    pub state: MHDState,
    pub report: ConvergenceReport,
    pub params: MHDParams,
}

impl SolveSummary {
    pub fn exit_code(&self) -> i32 {
        if self.report.converged {
            EXIT_OK
        } else {
            EXIT_DIVERGED
        }
    }
}

fn summary_csv(r: &ConvergenceReport) -> String {
    let b = |x: bool| if x { "1" } else { "0" }.to_string();
    let res = &r.final_residuals;
    let rows: Vec<(&str, String)> = vec![
        ("method", r.method.as_str().to_string()),
        ("iterations", r.iterations.to_string()),
        ("converged", b(r.converged)),
        ("q1_max", fmt_real(r.q1)),
        ("q2_max", fmt_real(r.q2)),
        ("ln_max", fmt_real(r.max_ln())),
        ("cond1_ok", b(r.cond1_ok)),
        ("theorem2_ok", b(r.theorem2_ok)),
        ("theorem4_ok", b(r.theorem4_ok)),
        ("F", fmt_real(r.f_const)),
        ("C3", fmt_real(r.c3)),
        ("C4", fmt_real(r.c4)),
        ("W", fmt_real(r.w)),
        ("res_mom", fmt_real(res.momentum_rel())),
        ("res_ind", fmt_real(res.induction_rel())),
        ("divu", fmt_real(res.div_u_rel())),
        ("divB", fmt_real(res.div_b_rel())),
    ];
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

/// Runs the configured solver, writing `convergence.csv` and `energy.csv` as it goes and the
/// final state under `state/`. Conditions that abort the run come back as errors; the logs
/// written up to that point stay on disk.
pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveSummary, Error> {
    prepare_output(cfg)?;
    let domain = cfg.build_domain()?;
    let params = cfg.build_params(&domain)?;
    let ops = OperatorSet::new(domain.clone());
    let consts = estimate_constants(&domain, &ops, cfg.constants.samples, cfg.seed)?;
    let init = match &cfg.init {
        Some(dir) => {
            let (s, _) = read_state(dir)?;
            if s.u.grid != domain.grid {
                return Err(Error::DomainMismatch);
            }
            s
        }
        None => MHDState::zeros(domain.grid),
    };

    let out = &cfg.output;
    let conv = RefCell::new(CsvLog::create(&out.join("convergence.csv"), IterationRecord::CSV_HEADER)?);
    let energy = RefCell::new(CsvLog::create(&out.join("energy.csv"), &format!("iter,{}", EnergyReport::CSV_HEADER))?);
    let log_error = RefCell::new(None);
    let mut observer = |r: &IterationRecord| {
        let res = conv.borrow_mut().row(&r.csv_row()).and_then(|_| energy.borrow_mut().row(&format!("{},{}", r.iter, r.energy.csv_row())));
        if let Err(e) = res {
            log_error.borrow_mut().get_or_insert(e);
        }
    };
    let (state, report) = solve(&params, &ops, &cfg.solver, &consts, &init, &mut observer)?;
    if let Some(e) = log_error.into_inner() {
        return Err(e);
    }

    let mut extra = BTreeMap::new();
    extra.insert("params.re".to_string(), fmt_real(params.re));
    extra.insert("params.rm".to_string(), fmt_real(params.rm));
    extra.insert("params.mu0".to_string(), fmt_real(params.mu0));
    extra.insert("params.exponent_mode".to_string(), params.exponent_mode.as_str().to_string());
    extra.insert("solver.method".to_string(), report.method.as_str().to_string());
    extra.insert("solver.iterations".to_string(), report.iterations.to_string());
    extra.insert("solver.converged".to_string(), report.converged.to_string());
    extra.insert("seed".to_string(), cfg.seed.to_string());
    write_state(&out.join("state"), &state, &extra)?;
    fs::write(out.join("report.csv"), summary_csv(&report))?;
    Ok(SolveSummary { state, report, params })
}
