//! The energy functional `J(u, B)` and its coercivity conditions.

use crate::grid::{h1_norm, l2_norm, sc_inner, QField};
use crate::mhd::{convective, lorentz, MHDParams};
use crate::operators::dirac_fwd;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    pub j: f64,
    pub viscous_u: f64,
    pub viscous_b: f64,
    pub lorentz_coupling: f64,
    pub induction_coupling: f64,
    pub coercivity_ok: bool,
    pub rho_max: f64,
}

impl EnergyReport {
    pub const CSV_HEADER: &'static str = "J,viscous_u,viscous_B,lorentz_coupling,induction_coupling,coercivity_ok,rho_max";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            self.j,
            self.viscous_u,
            self.viscous_b,
            self.lorentz_coupling,
            self.induction_coupling,
            self.coercivity_ok,
            self.rho_max
        )
    }
}

/// `J = (1/Re)||Du||^2 - (1/mu0) Sc<Vec((DB)B), u> + (1/Rm)||DB||^2 + Sc<(u.grad)B - (B.grad)u, B>`.
/// Coercivity is judged against the radius for the supplied `cs`.
pub fn energy(u: &QField, b: &QField, params: &MHDParams, cs: f64) -> Result<EnergyReport, Error> {
    if !u.is_pure() {
        return Err(Error::NotPure("energy u"));
    }
    if !b.is_pure() {
        return Err(Error::NotPure("energy B"));
    }
    u.check_same(b)?;
    let viscous_u = l2_norm(&dirac_fwd(u)).powi(2) / params.re;
    let viscous_b = l2_norm(&dirac_fwd(b)).powi(2) / params.rm;
    let lorentz_coupling = sc_inner(&lorentz(b, params.mu0)?, u)?;
    let induction_coupling = sc_inner(&convective(u, b)?.sub(&convective(b, u)?), b)?;
    let j = viscous_u - lorentz_coupling + viscous_b + induction_coupling;
    let rho_max = coercivity_radius(params.re, params.rm, params.mu0, cs);
    Ok(EnergyReport {
        j,
        viscous_u,
        viscous_b,
        lorentz_coupling,
        induction_coupling,
        coercivity_ok: is_coercive(h1_norm(b), params.re, params.rm, params.mu0, cs),
        rho_max,
    })
}

/// `min{Cs/Re, Cs/Rm} / (1 + 1/(2 mu0))`
pub fn coercivity_radius(re: f64, rm: f64, mu0: f64, cs: f64) -> f64 {
    (cs / re).min(cs / rm) / (1.0 + 1.0 / (2.0 * mu0))
}

pub fn is_coercive(b_h1: f64, re: f64, rm: f64, mu0: f64, cs: f64) -> bool {
    b_h1 < coercivity_radius(re, rm, mu0, cs)
}

/// `[Cs/Re - (2 + 1/mu0) B/2] u^2 + [Cs/Rm - (2 + 1/mu0) B/2] B^2`
pub fn lower_bound_estimate(u_h1: f64, b_h1: f64, re: f64, rm: f64, mu0: f64, cs: f64) -> f64 {
    let c = 0.5 * (2.0 + 1.0 / mu0) * b_h1;
    (cs / re - c) * u_h1 * u_h1 + (cs / rm - c) * b_h1 * b_h1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryData, VoxelDomain};
    use crate::mhd::ExponentMode;
    use crate::sampling::{random_smooth_field, rng};
    use proptest::prelude::*;

    fn params(re: f64, rm: f64, mu0: f64) -> MHDParams {
        let d = VoxelDomain::unit_cube(2).unwrap();
        MHDParams::new(re, rm, mu0, BoundaryData::zeros(&d), ExponentMode::Linear).unwrap()
    }

    #[test]
    fn special_cases() {
        let d = VoxelDomain::unit_cube(6).unwrap();
        let g = d.grid;
        let p = MHDParams::new(2.0, 3.0, 0.5, BoundaryData::zeros(&d), ExponentMode::Linear).unwrap();
        let z = QField::zeros(g);
        let r = energy(&z, &z, &p, 1.0).unwrap();
        assert_eq!(r.j, 0.0);
        let mut s = rng(1);
        let u = random_smooth_field(g, 2, true, &mut s);
        let b = random_smooth_field(g, 2, true, &mut s);
        let r = energy(&u, &z, &p, 1.0).unwrap();
        let oracle = l2_norm(&dirac_fwd(&u)).powi(2) / 2.0;
        assert!((r.j - oracle).abs() <= 1e-12 * oracle);
        assert!(r.j > 0.0);
        let r = energy(&z, &b, &p, 1.0).unwrap();
        assert_eq!(r.j, l2_norm(&dirac_fwd(&b)).powi(2) / 3.0);
        let r = energy(&u, &b, &p, 1.0).unwrap();
        assert_eq!(r.j, r.viscous_u + r.viscous_b - r.lorentz_coupling + r.induction_coupling);
        let not_pure = u.map(|q| q + crate::Quaternion::ONE);
        assert!(energy(&not_pure, &b, &p, 1.0).is_err());
    }

    #[test]
    fn radius_examples() {
        assert!((coercivity_radius(1.0, 1.0, 1.0, 1.0) - 2.0 / 3.0).abs() <= 1e-14);
        assert!((coercivity_radius(2.0, 1.0, 1.0, 1.0) - 1.0 / 3.0).abs() <= 1e-14);
        let p = params(1.0, 1.0, 1.0);
        let rho = coercivity_radius(p.re, p.rm, p.mu0, 1.0);
        assert!(is_coercive(0.0, p.re, p.rm, p.mu0, 1.0));
        assert!(!is_coercive(rho, p.re, p.rm, p.mu0, 1.0));
        assert!(is_coercive(rho * (1.0 - 1e-12), p.re, p.rm, p.mu0, 1.0));
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound_estimate(0.0, 0.0, 1.0, 2.0, 3.0, 4.0), 0.0);
        assert!((lower_bound_estimate(2.0, 0.0, 4.0, 1.0, 1.0, 3.0) - 3.0 / 4.0 * 4.0).abs() <= 1e-14);
        let (u, b, re, rm, mu0, cs) = (0.7, 0.3, 1.7, 2.9, 0.8, 1.3);
        let c = (2.0 + 1.0 / mu0) / 2.0;
        let hand = (cs / re - c * b) * u * u + (cs / rm - c * b) * b * b;
        assert!((lower_bound_estimate(u, b, re, rm, mu0, cs) - hand).abs() <= 1e-14);
    }

    proptest! {
        #[test]
        fn radius_positive_and_monotone(re in 0.01..100.0f64, rm in 0.01..100.0f64, mu0 in 0.01..100.0f64, cs in 0.01..100.0f64, f in 1.0..10.0f64) {
            let r = coercivity_radius(re, rm, mu0, cs);
            prop_assert!(r > 0.0);
            prop_assert!(coercivity_radius(re * f, rm, mu0, cs) <= r);
        }
    }
}
