//! Seeded random fields for constant estimation, verification, and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, QField};
use crate::quaternion::Quaternion;

pub type FieldRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FieldRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent uniform values in [-1, 1] per component.
pub fn random_field(grid: Grid, rng: &mut FieldRng) -> QField {
    let values = (0..grid.len())
        .map(|_| Quaternion::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    QField { grid, values }
}

fn unit_coords(grid: Grid, x: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|a| (x[a] - grid.origin[a]) / (grid.n[a] as f64 * grid.h))
}

/// Sum of low-frequency cosine modes with decaying random amplitudes.
/// With `pure = true` the scalar part is zero.
pub fn random_smooth_field(grid: Grid, modes: usize, pure: bool, rng: &mut FieldRng) -> QField {
    let mut terms = Vec::new();
    for k0 in 0..=modes {
        for k1 in 0..=modes {
            for k2 in 0..=modes {
                let kk = (k0 * k0 + k1 * k1 + k2 * k2) as f64;
                let amp = 1.0 / (1.0 + kk);
                let mut coef = [0.0; 4];
                let mut phase = [0.0; 4];
                for c in 0..4 {
                    coef[c] = amp * rng.gen_range(-1.0..1.0);
                    phase[c] = rng.gen_range(0.0..std::f64::consts::TAU);
                }
                terms.push(([k0 as f64, k1 as f64, k2 as f64], coef, phase));
            }
        }
    }
    QField::from_fn(grid, |x| {
        let t = unit_coords(grid, x);
        let mut q = [0.0; 4];
        for (k, coef, phase) in &terms {
            let arg = std::f64::consts::PI * (k[0] * t[0] + k[1] * t[1] + k[2] * t[2]);
            for c in 0..4 {
                q[c] += coef[c] * (arg + phase[c]).cos();
            }
        }
        if pure {
            q[0] = 0.0;
        }
        Quaternion::from_array(q)
    })
}

/// Smooth bump equal to zero within `margin` (fraction of each side) of the boundary.
pub fn bump(grid: Grid, margin: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|c| {
            let t = unit_coords(grid, grid.center(c));
            let mut w = 1.0;
            for a in 0..3 {
                let s = (t[a] - margin) / (1.0 - 2.0 * margin);
                w *= if (0.0..=1.0).contains(&s) { (std::f64::consts::PI * s).sin().powi(2) } else { 0.0 };
            }
            w
        })
        .collect()
}

/// Random smooth field multiplied by `bump(grid, margin)`.
pub fn random_bump_field(grid: Grid, modes: usize, margin: f64, pure: bool, rng: &mut FieldRng) -> QField {
    let f = random_smooth_field(grid, modes, pure, rng);
    let w = bump(grid, margin);
    QField { grid, values: f.values.iter().zip(&w).map(|(&q, &b)| q * b).collect() }
}
