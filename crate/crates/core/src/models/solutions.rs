//! Initial data and closed-form solutions of the built-in testbeds.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Model, ModelKind};
use crate::error::{Error, Result};
use crate::spectral::{Grid, State};

/// `μ²` of the KdV one-soliton benchmark.
pub const KDV_ONE_SOLITON_MU2: f64 = 0.0013020833;
/// Soliton speed parameter `γ` of the KdV one-soliton benchmark.
pub const KDV_ONE_SOLITON_GAMMA: f64 = 1.0 / 3.0;
pub const KDV_ONE_SOLITON_DOMAIN: (f64, f64) = (-3.0, 5.0);
pub const KDV_TWO_SOLITON_DOMAIN: (f64, f64) = (-40.0, 40.0);
pub const NLS_DOMAIN: (f64, f64) = (-64.0, 64.0);
pub const SG_RING_DOMAIN: [(f64, f64); 2] = [(-7.0, 7.0), (-7.0, 7.0)];
pub const SG_COLLISION_DOMAIN: [(f64, f64); 2] = [(-30.0, 10.0), (-21.0, 7.0)];

/// Maps `theta` back into `[lo, hi]` by whole periods, using the truncated
/// remainder separately for points left and right of the interval.
pub fn wrap_periodic(theta: f64, lo: f64, hi: f64) -> f64 {
    let len = hi - lo;
    if theta < lo {
        hi - (hi - theta) % len
    } else if theta > hi {
        lo + (theta - lo) % len
    } else {
        theta
    }
}

/// KdV one-soliton `3γ sech²(√γ/(2μ) (x − γt))` travelling on the periodic
/// interval `[lo, hi]`.
pub fn kdv_one_soliton(x: f64, t: f64, gamma: f64, mu: f64, lo: f64, hi: f64) -> f64 {
    let arg = gamma.sqrt() / (2.0 * mu) * wrap_periodic(x - gamma * t, lo, hi);
    let sech = 1.0 / arg.cosh();
    3.0 * gamma * sech * sech
}

/// KdV two-soliton (`η = μ = 1`, `k₁ = 0.4`, `k₂ = 0.6`).
pub fn kdv_two_soliton(x: f64, t: f64) -> f64 {
    let (k1, k2) = (0.4f64, 0.6f64);
    let rho = (k1 - k2) / (k1 + k2);
    let xi1 = k1 * x - k1.powi(3) * t + 4.0;
    let xi2 = k2 * x - k2.powi(3) * t + 15.0;
    let (e1, e2, e12) = (xi1.exp(), xi2.exp(), (xi1 + xi2).exp());
    let r2 = rho * rho;
    let num = k1 * k1 * e1
        + k2 * k2 * e2
        + 2.0 * (k2 - k1).powi(2) * e12
        + r2 * (k2 * k2 * e1 + k1 * k1 * e2) * e12;
    let den = 1.0 + e1 + e2 + r2 * e12;
    12.0 * num / (den * den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlsKind {
    One,
    Two,
}

/// NLS initial data at `x`, returned as `(Re u, Im u)`.
pub fn nls_initial(kind: NlsKind, x: f64) -> (f64, f64) {
    let a = (x + 20.0) / 2.0;
    let mut p = FRAC_1_SQRT_2 * a.cos() / a.cosh();
    let mut q = FRAC_1_SQRT_2 * a.sin() / a.cosh();
    if kind == NlsKind::Two {
        let b = (x - 20.0) / 2.0;
        p += FRAC_1_SQRT_2 * b.cos() / b.cosh();
        q -= FRAC_1_SQRT_2 * b.sin() / b.cosh();
    }
    (p, q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgKind {
    Ring,
    Collision,
}

/// Sine-Gordon initial `(u, u_t)` sampled on a 2D grid.
pub fn sg_initial(kind: SgKind, grid: &Arc<Grid>) -> Result<State> {
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid("sine-Gordon initial data needs a 2D grid".into()));
    }
    let (u, v) = match kind {
        SgKind::Ring => (
            grid.map_points(|p| 4.0 * (3.0 - p[0].hypot(p[1])).exp().atan()),
            vec![0.0; grid.len()],
        ),
        SgKind::Collision => {
            let s = |p: &[f64]| (4.0 - (p[0] + 3.0).hypot(p[1] + 7.0)) / 0.436;
            (
                grid.map_points(|p| 4.0 * s(p).exp().atan()),
                grid.map_points(|p| 4.13 / s(p).cosh()),
            )
        }
    };
    State::new(grid.clone(), vec![u, v])
}

/// Named initial conditions of the testbeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    KdvOneSoliton,
    KdvTwoSoliton,
    NlsOneSoliton,
    NlsTwoSoliton,
    SgRing,
    SgCollision,
}

impl InitialCondition {
    /// Samples the initial state on the model's grid.
    pub fn state(&self, model: &Model) -> Result<State> {
        let grid = model.grid();
        let mismatch = || {
            Error::ConfigInvalid(format!(
                "initial condition {self:?} does not fit model {}",
                model.name()
            ))
        };
        match (self, model.kind()) {
            (InitialCondition::KdvOneSoliton, ModelKind::Kdv { mu, .. }) => {
                let a = grid.axis(0);
                let u = grid.map_points(|p| kdv_one_soliton(p[0], 0.0, KDV_ONE_SOLITON_GAMMA, mu, a.lo, a.hi));
                State::new(grid.clone(), vec![u])
            }
            (InitialCondition::KdvTwoSoliton, ModelKind::Kdv { .. }) => {
                State::new(grid.clone(), vec![grid.map_points(|p| kdv_two_soliton(p[0], 0.0))])
            }
            (InitialCondition::NlsOneSoliton | InitialCondition::NlsTwoSoliton, ModelKind::Nls { .. }) => {
                let kind = if *self == InitialCondition::NlsOneSoliton {
                    NlsKind::One
                } else {
                    NlsKind::Two
                };
                let p = grid.map_points(|x| nls_initial(kind, x[0]).0);
                let q = grid.map_points(|x| nls_initial(kind, x[0]).1);
                State::new(grid.clone(), vec![p, q])
            }
            (InitialCondition::SgRing, ModelKind::SineGordon { .. }) => sg_initial(SgKind::Ring, grid),
            (InitialCondition::SgCollision, ModelKind::SineGordon { .. }) => sg_initial(SgKind::Collision, grid),
            _ => Err(mismatch()),
        }
    }

    /// Exact solution at time `t`, when one is known on the periodic grid.
    pub fn exact(&self, model: &Model, t: f64) -> Option<State> {
        match (self, model.kind()) {
            (InitialCondition::KdvOneSoliton, ModelKind::Kdv { mu, .. }) => {
                let grid = model.grid();
                let a = grid.axis(0);
                let u = grid.map_points(|p| kdv_one_soliton(p[0], t, KDV_ONE_SOLITON_GAMMA, mu, a.lo, a.hi));
                State::new(grid.clone(), vec![u]).ok()
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_periodic(6.0, -3.0, 5.0), -2.0);
        assert_eq!(wrap_periodic(-4.0, -3.0, 5.0), 4.0);
        assert_eq!(wrap_periodic(1.5, -3.0, 5.0), 1.5);
        assert_eq!(wrap_periodic(-19.0, -3.0, 5.0), 5.0 - 24.0 % 8.0);
    }

    #[test]
    fn kdv_peak_and_period() {
        let mu = KDV_ONE_SOLITON_MU2.sqrt();
        let g = KDV_ONE_SOLITON_GAMMA;
        assert!((kdv_one_soliton(0.0, 0.0, g, mu, -3.0, 5.0) - 1.0).abs() < 1e-15);
        for i in 0..64 {
            let x = -3.0 + i as f64 * 0.125;
            let a = kdv_one_soliton(x, 0.0, g, mu, -3.0, 5.0);
            let b = kdv_one_soliton(x, 24.0, g, mu, -3.0, 5.0);
            assert!((a - b).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn kdv_two_soliton_parameters() {
        let (k1, k2) = (0.4f64, 0.6f64);
        assert!(((k1 - k2) / (k1 + k2) + 0.2).abs() < 1e-15);
        assert_eq!(k1 * 0.0 - k1.powi(3) * 0.0 + 4.0, 4.0);
        assert_eq!(k2 * 0.0 - k2.powi(3) * 0.0 + 15.0, 15.0);
        for i in 0..=512 {
            let x = -40.0 + 80.0 * i as f64 / 512.0;
            let u = kdv_two_soliton(x, 0.0);
            assert!(u.is_finite() && u > 0.0, "x={x} u={u}");
        }
    }

    #[test]
    fn nls_profiles() {
        let (p, q) = nls_initial(NlsKind::One, -20.0);
        assert!((p.hypot(q) - FRAC_1_SQRT_2).abs() < 1e-15);
        for x in [-20.0, 20.0] {
            let (p, q) = nls_initial(NlsKind::Two, x);
            assert!((p.hypot(q) - FRAC_1_SQRT_2).abs() < 1e-8);
        }
        for kind in [NlsKind::One, NlsKind::Two] {
            for x in [-64.0, 64.0] {
                let (p, q) = nls_initial(kind, x);
                assert!(p.hypot(q) < 1e-8);
            }
        }
    }

    #[test]
    fn sg_initial_data() {
        let grid = Grid::new_2d((-7.0, 7.0, 16), (-7.0, 7.0, 16)).unwrap();
        let ring = sg_initial(SgKind::Ring, &grid).unwrap();
        assert_eq!(ring.component(1).iter().fold(0.0f64, |m, v| m.max(v.abs())), 0.0);
        // grid point 8*16 + 8 is the origin
        let centre = ring.component(0)[8 * 16 + 8];
        assert!((centre - 4.0 * 3f64.exp().atan()).abs() < 1e-15);
        assert!((centre - 6.0842).abs() < 1e-4);

        let grid = Grid::new_2d((-30.0, 10.0, 32), (-21.0, 7.0, 32)).unwrap();
        let col = sg_initial(SgKind::Collision, &grid).unwrap();
        let vmax = col.component(1).iter().fold(0.0f64, |m, v| m.max(*v));
        assert!(vmax <= 4.13 && vmax > 4.0);
    }
}
