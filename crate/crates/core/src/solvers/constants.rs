//! Estimation of the constants `C1`, `Cs`, `CD`, `Cu`, `k` entering the convergence conditions.

use serde::{Deserialize, Serialize};

use crate::grid::{h1_norm, l2_norm, lq_norm, sc_inner, QField, VoxelDomain};
use crate::mhd::{convective, lorentz};
use crate::operators::{dirac_fwd, dirac_fwd_adjoint, OperatorSet};
use crate::sampling::{random_bump_field, random_smooth_field, rng, FieldRng};
use crate::Error;

/// Exponent of the `L^q` norms in the nonlinear estimates.
pub const LEMMA3_Q: f64 = 1.25;
/// Safety factor applied to sampled extremal ratios.
pub const SAFETY: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Estimated,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::Estimated => "estimated",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsProvenance {
    pub c1: Provenance,
    pub cs: Provenance,
    pub cd: Provenance,
    pub cu: Provenance,
    pub k: Provenance,
    pub lambda_min: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBundle {
    pub c1: f64,
    pub cs: f64,
    pub cd: f64,
    pub cu: f64,
    pub k: f64,
    pub lambda_min: f64,
    pub provenance: ConstantsProvenance,
}

impl ConstantsBundle {
    /// Bundle from given values, all marked analytic. Used for hand evaluations.
    pub fn from_values(c1: f64, cs: f64, cd: f64, cu: f64, k: f64, lambda_min: f64) -> Self {
        let a = Provenance::Analytic;
        ConstantsBundle {
            c1,
            cs,
            cd,
            cu,
            k,
            lambda_min,
            provenance: ConstantsProvenance { c1: a, cs: a, cd: a, cu: a, k: a, lambda_min: a },
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in [("C1", self.c1), ("Cs", self.cs), ("CD", self.cd), ("Cu", self.cu), ("k", self.k), ("lambda_min", self.lambda_min)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Precondition(format!("constant {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `(name, value, provenance)` rows in a fixed order.
    pub fn rows(&self) -> [(&'static str, f64, Provenance); 6] {
        let p = self.provenance;
        [
            ("C1", self.c1, p.c1),
            ("Cs", self.cs, p.cs),
            ("CD", self.cd, p.cd),
            ("Cu", self.cu, p.cu),
            ("k", self.k, p.k),
            ("lambda_min", self.lambda_min, p.lambda_min),
        ]
    }
}

/// The four ratios bounded by `Cs`:
/// `||(u.grad)u||_Lq / ||u||^2_H1`, `||Vec((DB)B)||_Lq / ||B||^2_H1`, `||DB||_L2 / ||B||_H1`
/// and `||T (u.grad)u||_L2 / ||u||^2_H1`. `None` for a zero field.
pub fn lemma3_ratios(u: &QField, b: &QField, ops: &OperatorSet) -> Result<Option<[f64; 4]>, Error> {
    let uh = h1_norm(u);
    let bh = h1_norm(b);
    if uh == 0.0 || bh == 0.0 {
        return Ok(None);
    }
    let conv = convective(u, u)?;
    let r1 = lq_norm(&conv, LEMMA3_Q)? / (uh * uh);
    let r2 = lq_norm(&lorentz(b, 1.0)?, LEMMA3_Q)? / (bh * bh);
    let r3 = l2_norm(&dirac_fwd(b)) / bh;
    let r4 = l2_norm(&ops.teodorescu(&conv)) / (uh * uh);
    Ok(Some([r1, r2, r3, r4]))
}

fn lemma3_sample(ops: &OperatorSet, r: &mut FieldRng) -> (QField, QField) {
    let g = ops.domain.grid;
    (random_smooth_field(g, 3, true, r), random_smooth_field(g, 3, true, r))
}

/// Number of holdout samples violating any inequality with the given `cs`.
pub fn lemma3_violations(cs: f64, ops: &OperatorSet, samples: usize, seed: u64) -> Result<usize, Error> {
    let mut r = rng(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let (u, b) = lemma3_sample(ops, &mut r);
        if let Some(rs) = lemma3_ratios(&u, &b, ops)? {
            if rs.iter().any(|&x| x > cs) {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

/// `||D+ u||_L2 / ||u||_H1`
fn dirac_ratio(u: &QField) -> Option<f64> {
    let d = h1_norm(u);
    (d > 0.0).then(|| l2_norm(&dirac_fwd(u)) / d)
}

/// `sc<D+ u, D+ u> / ||u||^2_H1`, the homogeneous form of the coercivity quotient.
fn coercivity_ratio(u: &QField) -> Option<f64> {
    let d = h1_norm(u);
    let du = dirac_fwd(u);
    (d > 0.0).then(|| sc_inner(&du, &du).unwrap_or(0.0) / (d * d))
}

pub fn estimate_constants(domain: &VoxelDomain, ops: &OperatorSet, samples: usize, seed: u64) -> Result<ConstantsBundle, Error> {
    if samples < 10 {
        return Err(Error::Precondition(format!("at least 10 samples required, got {samples}")));
    }
    if domain.grid != ops.domain.grid {
        return Err(Error::DomainMismatch);
    }
    let lambda_min = ops.lambda_min()?;
    let c1 = 1.0 / lambda_min;
    let k = ops.op_norm_tqt(200, 1e-8)?.value;

    let mut r = rng(seed);
    let mut cs_max: f64 = 0.0;
    let mut used = 0;
    for _ in 0..samples {
        let (u, b) = lemma3_sample(ops, &mut r);
        if let Some(rs) = lemma3_ratios(&u, &b, ops)? {
            used += 1;
            cs_max = rs.iter().fold(cs_max, |m, &x| m.max(x));
        }
    }
    if used == 0 {
        return Err(Error::Degenerate(samples));
    }

    // Dirac ratios on fields vanishing near the wall
    let g = domain.grid;
    let mut cd_max: f64 = 0.0;
    let mut cu_min = f64::INFINITY;
    let mut best: Option<(f64, QField)> = None;
    for _ in 0..samples {
        let u = random_bump_field(g, 3, 0.0, true, &mut r);
        if let (Some(x), Some(c)) = (dirac_ratio(&u), coercivity_ratio(&u)) {
            cd_max = cd_max.max(x);
            cu_min = cu_min.min(c);
            if best.as_ref().map_or(true, |(b, _)| x > *b) {
                best = Some((x, u));
            }
        }
    }
    let Some((_, start)) = best else {
        return Err(Error::Degenerate(samples));
    };
    // refine the upper ratio along power iterates of D+^T D+
    let mut v = start;
    for _ in 0..20 {
        v = dirac_fwd_adjoint(&dirac_fwd(&v)).vec_part();
        let n = l2_norm(&v);
        if n == 0.0 {
            break;
        }
        v = v.scale(1.0 / n);
        if let Some(x) = dirac_ratio(&v) {
            cd_max = cd_max.max(x);
        }
    }

    let est = Provenance::Estimated;
    Ok(ConstantsBundle {
        c1,
        cs: SAFETY * cs_max,
        cd: SAFETY * cd_max,
        cu: cu_min / SAFETY,
        k,
        lambda_min,
        provenance: ConstantsProvenance { c1: Provenance::Analytic, cs: est, cd: est, cu: est, k: est, lambda_min: Provenance::Analytic },
    })
}
