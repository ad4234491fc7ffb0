//! Smallness conditions and the Lipschitz constant of the Banach scheme.

use super::constants::ConstantsBundle;
use crate::mhd::MHDParams;
use crate::Error;

/// `1 / (2 C1 Cs Rm^2)`
pub fn cond1_threshold(c: &ConstantsBundle, rm: f64) -> f64 {
    1.0 / (2.0 * c.c1 * c.cs * rm * rm)
}

/// Strict `||u_n||_H1 < 1 / (2 C1 Cs Rm^2)`.
pub fn check_cond1(u_h1: f64, c: &ConstantsBundle, rm: f64) -> bool {
    u_h1 < cond1_threshold(c, rm)
}

/// `min{mu0 / (Re^2 k CD), 1 / (Rm^2 k CD)}`
pub fn schauder_threshold(c: &ConstantsBundle, params: &MHDParams) -> f64 {
    let a = params.mu0 / (params.re * params.re * c.k * c.cd);
    let b = 1.0 / (params.rm * params.rm * c.k * c.cd);
    a.min(b)
}

/// Non-strict `||u~||_H1 <= min{...}`.
pub fn check_schauder_bound(u_h1: f64, c: &ConstantsBundle, params: &MHDParams) -> bool {
    u_h1 <= schauder_threshold(c, params)
}

/// `L_n = 2 Re^2 C1 (Cs C3 + ((1/2 + Cs) C4 / mu0) Rm^2 C1 F)`
pub fn lipschitz_ln(c: &ConstantsBundle, c3: f64, c4: f64, f: f64, params: &MHDParams) -> f64 {
    let (re, rm) = (params.re, params.rm);
    2.0 * re * re * c.c1 * (c.cs * c3 + ((0.5 + c.cs) * c4 / params.mu0) * rm * rm * c.c1 * f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem4 {
    /// `(1/mu0) supB^2 <= 1 / (16 C1^2 Cs^2 Re^4)`
    pub field_ok: bool,
    /// `Rm^2 < 4 Cs^2 Re^2 (8 W Re^2 C1 Cs - 1) / (1 + 2 Cs)`
    pub rm_ok: bool,
    pub w: f64,
    /// Right side of the `Rm^2` condition.
    pub rm2_bound: f64,
}

impl Theorem4 {
    pub fn ok(&self) -> bool {
        self.field_ok && self.rm_ok
    }
}

/// Evaluates both conditions. A negative radicand under `W` is an error,
/// which implies the field-size condition already failed.
pub fn check_theorem4(c: &ConstantsBundle, params: &MHDParams, sup_b_h1: f64) -> Result<Theorem4, Error> {
    let (re, rm, mu0) = (params.re, params.rm, params.mu0);
    let cc = c.c1 * c.c1 * c.cs * c.cs * re.powi(4);
    let b2 = sup_b_h1 * sup_b_h1 / mu0;
    let field_ok = b2 <= 1.0 / (16.0 * cc);
    let radicand = 1.0 / (4.0 * cc) - b2;
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand { radicand });
    }
    let w = radicand.sqrt();
    let rm2_bound = 4.0 * c.cs * c.cs * re * re * (8.0 * w * re * re * c.c1 * c.cs - 1.0) / (1.0 + 2.0 * c.cs);
    Ok(Theorem4 { field_ok, rm_ok: rm * rm < rm2_bound, w, rm2_bound })
}

/// `(ok, W)`, with `(false, NaN)` when the radicand is negative.
pub fn theorem4_flag(c: &ConstantsBundle, params: &MHDParams, sup_b_h1: f64) -> (bool, f64) {
    match check_theorem4(c, params, sup_b_h1) {
        Ok(t) => (t.ok(), t.w),
        Err(_) => (false, f64::NAN),
    }
}
