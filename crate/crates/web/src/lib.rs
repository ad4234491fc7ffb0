//! Browser demo: three small operator experiments exposed through wasm-bindgen.
//!
//! Each export returns a JSON string so the page needs no glue beyond `JSON.parse`.
//! The `*_json` functions are plain Rust and are what the native tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qmhd::grid::{h1_norm, l2_norm, sc_inner, BoundaryData, Grid, QField, VoxelDomain};
use qmhd::mhd::{ExponentMode, MHDParams, MHDState};
use qmhd::operators::{dirac_fwd, OperatorSet};
use qmhd::sampling::{random_smooth_field, rng};
use qmhd::solvers::{estimate_constants, solve, IterationRecord, SolverConfig};
use qmhd::Quaternion;

const MAX_N: usize = 16;

#[derive(Serialize)]
struct Slice {
    n: usize,
    /// Row-major `n x n` values on the plane `k = n / 2`.
    values: Vec<f64>,
}

fn mid_slice(f: &QField, value: impl Fn(Quaternion) -> f64) -> Slice {
    let g = f.grid;
    let k = g.n[2] / 2;
    let mut values = Vec::with_capacity(g.n[0] * g.n[1]);
    for j in 0..g.n[1] {
        for i in 0..g.n[0] {
            values.push(value(f[g.index(i, j, k)]));
        }
    }
    Slice { n: g.n[0], values }
}

fn check_n(n: usize) -> Result<(), String> {
    if (2..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(format!("grid size must be between 2 and {MAX_N}, got {n}"))
    }
}

fn ops_for(n: usize) -> Result<OperatorSet, String> {
    check_n(n)?;
    Ok(OperatorSet::new(VoxelDomain::unit_cube(n).map_err(|e| e.to_string())?))
}

fn interior_max(g: Grid, e: &QField, depth: usize) -> f64 {
    (0..g.len()).filter(|&c| g.depth(c) >= depth).map(|c| e[c].norm()).fold(0.0, f64::max)
}

#[derive(Serialize)]
struct RightInverse {
    h: f64,
    /// `max |D+ T f - f|` over cells at depth >= 3, relative to `max |f|`.
    interior_error: f64,
    f: Slice,
    error: Slice,
}

/// Applies the Teodorescu transform to a random smooth field and differentiates it back.
pub fn right_inverse_json(n: usize, seed: u64) -> Result<String, String> {
    let ops = ops_for(n)?;
    let g = ops.domain.grid;
    let f = random_smooth_field(g, 2, false, &mut rng(seed));
    let e = dirac_fwd(&ops.teodorescu(&f)).sub(&f);
    let out = RightInverse {
        h: g.h,
        interior_error: interior_max(g, &e, 3) / f.max_abs(),
        f: mid_slice(&f, |q| q.norm()),
        error: mid_slice(&e, |q| q.norm()),
    };
    Ok(serde_json::to_string(&out).expect("serialisable"))
}

#[derive(Serialize)]
struct Split {
    norm_f: f64,
    norm_p: f64,
    norm_q: f64,
    /// `|sc<Pf, Qf>| / ||f||^2`
    orthogonality: f64,
    f: Slice,
    p: Slice,
    q: Slice,
}

/// Splits a random smooth field into its monogenic part `P f` and the gradient part `Q f`.
pub fn bergman_split_json(n: usize, seed: u64) -> Result<String, String> {
    let ops = ops_for(n)?;
    let g = ops.domain.grid;
    let f = random_smooth_field(g, 2, false, &mut rng(seed));
    let q = ops.bergman_q(&f).map_err(|e| e.to_string())?;
    let p = f.sub(&q);
    let nf = l2_norm(&f);
    let out = Split {
        norm_f: nf,
        norm_p: l2_norm(&p),
        norm_q: l2_norm(&q),
        orthogonality: sc_inner(&p, &q).map_err(|e| e.to_string())?.abs() / (nf * nf),
        f: mid_slice(&f, |x| x.norm()),
        p: mid_slice(&p, |x| x.norm()),
        q: mid_slice(&q, |x| x.norm()),
    };
    Ok(serde_json::to_string(&out).expect("serialisable"))
}

#[derive(Serialize)]
struct Step {
    iter: usize,
    du: f64,
    db: f64,
    ln: Option<f64>,
    change: f64,
    thm4: bool,
}

#[derive(Serialize)]
struct Run {
    converged: bool,
    error: Option<String>,
    steps: Vec<Step>,
    u_h1: f64,
    b_h1: f64,
    b: Slice,
}

/// Banach iteration with wall field `eps (y, z, x)`; returns the convergence history.
pub fn banach_run_json(n: usize, eps: f64, re: f64) -> Result<String, String> {
    let ops = ops_for(n)?;
    if !(eps.is_finite() && re > 0.0 && re.is_finite()) {
        return Err("eps must be finite and Re positive".into());
    }
    let d = ops.domain.clone();
    let g = d.grid;
    let h = BoundaryData::from_fn(&d, |x| Quaternion::pure([eps * x[1], eps * x[2], eps * x[0]]));
    let params = MHDParams::new(re, 1.0, 1.0, h, ExponentMode::Linear).map_err(|e| e.to_string())?;
    let consts = estimate_constants(&d, &ops, 10, 1).map_err(|e| e.to_string())?;
    let cfg = SolverConfig { max_outer: 40, ..SolverConfig::default() };
    let mut steps = Vec::new();
    let mut observe = |r: &IterationRecord| {
        steps.push(Step { iter: r.iter, du: r.du, db: r.db, ln: r.ln.is_finite().then_some(r.ln), change: r.change, thm4: r.thm4 });
    };
    let result = solve(&params, &ops, &cfg, &consts, &MHDState::zeros(g), &mut observe);
    let out = match result {
        Ok((state, report)) => Run {
            converged: report.converged,
            error: None,
            steps,
            u_h1: h1_norm(&state.u),
            b_h1: h1_norm(&state.b),
            b: mid_slice(&state.b, |x| x.norm()),
        },
        Err(e) => Run { converged: false, error: Some(e.to_string()), steps, u_h1: f64::NAN, b_h1: f64::NAN, b: Slice { n, values: vec![] } },
    };
    Ok(serde_json::to_string(&out).expect("serialisable"))
}

#[wasm_bindgen]
pub fn right_inverse(n: usize, seed: u32) -> Result<String, JsValue> {
    right_inverse_json(n, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bergman_split(n: usize, seed: u32) -> Result<String, JsValue> {
    bergman_split_json(n, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn banach_run(n: usize, eps: f64, re: f64) -> Result<String, JsValue> {
    banach_run_json(n, eps, re).map_err(|e| JsValue::from_str(&e))
}
