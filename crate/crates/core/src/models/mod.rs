//! Hamiltonian PDE instances `z_t = S (L z + N'(z))`.
//!
//! A [`Model`] couples constant-coefficient operators `S` (skew-adjoint) and
//! `L` (symmetric, non-negative), both stored as per-mode symbol tables, with
//! a pointwise [`Nonlinearity`]. The energy is `H = ½(z, Lz) + (N(z), 1)`.
//!
//! The three testbeds use these factorizations:
//!
//! | model | z | S | L | N |
//! |---|---|---|---|---|
//! | KdV | `u` | `∂x` | `−μ²∂xx` | `−η u³/6` |
//! | NLS | `(Re u, Im u)` | `[[0, 1], [−1, 0]]` | `−∂xx` on both | `−β(p²+q²)²/4` |
//! | sine-Gordon | `(u, u_t)` | `[[0, 1], [−1, 0]]` | `diag(−Δ, 1)` | `φ₀(1 − cos u)` |

mod solutions;

pub use solutions::{
    kdv_one_soliton, kdv_two_soliton, nls_initial, sg_initial, wrap_periodic, InitialCondition, NlsKind,
    SgKind, KDV_ONE_SOLITON_DOMAIN, KDV_ONE_SOLITON_GAMMA, KDV_ONE_SOLITON_MU2, KDV_TWO_SOLITON_DOMAIN,
    NLS_DOMAIN, SG_COLLISION_DOMAIN, SG_RING_DOMAIN,
};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{inner_product, Grid, ModeBlocks, State};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pointwise nonlinear energy density `N(z)` and its gradient `N'(z)`.
pub trait Nonlinearity: Send + Sync + fmt::Debug {
    /// `N` at one point; `z` holds the component values there.
    fn density(&self, z: &[f64]) -> f64;

    /// `N'` at one point, written into `out` (same length as `z`).
    fn gradient(&self, z: &[f64], out: &mut [f64]);
}

#[derive(Clone, Copy, Debug)]
pub struct KdvNonlinearity {
    pub eta: f64,
}

impl Nonlinearity for KdvNonlinearity {
    fn density(&self, z: &[f64]) -> f64 {
        -self.eta * z[0] * z[0] * z[0] / 6.0
    }

    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        out[0] = -0.5 * self.eta * z[0] * z[0];
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NlsNonlinearity {
    pub beta: f64,
}

impl Nonlinearity for NlsNonlinearity {
    fn density(&self, z: &[f64]) -> f64 {
        let m = z[0] * z[0] + z[1] * z[1];
        -0.25 * self.beta * m * m
    }

    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        let m = z[0] * z[0] + z[1] * z[1];
        out[0] = -self.beta * m * z[0];
        out[1] = -self.beta * m * z[1];
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SineGordonNonlinearity {
    pub phi0: f64,
}

impl Nonlinearity for SineGordonNonlinearity {
    fn density(&self, z: &[f64]) -> f64 {
        self.phi0 * (1.0 - z[0].cos())
    }

    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        out[0] = self.phi0 * z[0].sin();
        out[1] = 0.0;
    }
}

/// Parameters of the built-in testbeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ModelKind {
    Kdv { eta: f64, mu: f64 },
    Nls { beta: f64 },
    SineGordon { phi0: f64 },
    Custom,
}

/// Quadratic, nonlinear and total energy of a state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub quadratic: f64,
    pub nonlinear: f64,
    pub total: f64,
}

/// A Hamiltonian PDE discretized on a periodic grid.
#[derive(Clone, Debug)]
pub struct Model {
    name: String,
    kind: ModelKind,
    grid: Arc<Grid>,
    c: usize,
    s_blocks: ModeBlocks,
    l_blocks: ModeBlocks,
    sl_blocks: ModeBlocks,
    nonlinearity: Arc<dyn Nonlinearity>,
}

impl Model {
    /// Assembles a model from the symbols of `S` and `L`; the symbol of
    /// `S∘L` is formed by per-mode multiplication.
    pub fn new(
        name: impl Into<String>,
        grid: Arc<Grid>,
        s_blocks: ModeBlocks,
        l_blocks: ModeBlocks,
        nonlinearity: Arc<dyn Nonlinearity>,
    ) -> Result<Model> {
        let c = s_blocks.n_components();
        if l_blocks.n_components() != c || s_blocks.n_modes() != grid.len() || l_blocks.n_modes() != grid.len() {
            return Err(Error::ShapeMismatch("operator symbols do not match grid and component count".into()));
        }
        let sl_blocks = s_blocks.compose(&l_blocks);
        Ok(Model {
            name: name.into(),
            kind: ModelKind::Custom,
            grid,
            c,
            s_blocks,
            l_blocks,
            sl_blocks,
            nonlinearity,
        })
    }

    /// KdV `u_t + η u u_x + μ² u_xxx = 0` on a 1D grid.
    pub fn kdv(eta: f64, mu: f64, grid: Arc<Grid>) -> Result<Model> {
        require_dim(&grid, 1, "KdV")?;
        let mu2 = mu * mu;
        let s = ModeBlocks::from_fn(&grid, 1, |w, b| b[0] = I * w.k_odd[0]);
        let l = ModeBlocks::from_fn(&grid, 1, |w, b| b[0] = Complex64::new(mu2 * w.k[0] * w.k[0], 0.0));
        let mut m = Model::new("kdv", grid, s, l, Arc::new(KdvNonlinearity { eta }))?;
        m.kind = ModelKind::Kdv { eta, mu };
        Ok(m)
    }

    /// Cubic NLS `i u_t + u_xx + β|u|²u = 0`, split into real and imaginary parts.
    pub fn nls(beta: f64, grid: Arc<Grid>) -> Result<Model> {
        require_dim(&grid, 1, "NLS")?;
        let s = ModeBlocks::from_fn(&grid, 2, skew_pair);
        let l = ModeBlocks::from_fn(&grid, 2, |w, b| {
            let k2 = Complex64::new(w.k[0] * w.k[0], 0.0);
            b[0] = k2;
            b[3] = k2;
        });
        let mut m = Model::new("nls", grid, s, l, Arc::new(NlsNonlinearity { beta }))?;
        m.kind = ModelKind::Nls { beta };
        Ok(m)
    }

    /// 2D sine-Gordon `u_tt − Δu + φ₀ sin u = 0` as a first-order system in `(u, u_t)`.
    pub fn sine_gordon(phi0: f64, grid: Arc<Grid>) -> Result<Model> {
        require_dim(&grid, 2, "sine-Gordon")?;
        let s = ModeBlocks::from_fn(&grid, 2, skew_pair);
        let l = ModeBlocks::from_fn(&grid, 2, |w, b| {
            b[0] = Complex64::new(w.norm_sq(), 0.0);
            b[3] = Complex64::new(1.0, 0.0);
        });
        let mut m = Model::new("sine_gordon", grid, s, l, Arc::new(SineGordonNonlinearity { phi0 }))?;
        m.kind = ModelKind::SineGordon { phi0 };
        Ok(m)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn n_components(&self) -> usize {
        self.c
    }

    pub fn s_blocks(&self) -> &ModeBlocks {
        &self.s_blocks
    }

    pub fn l_blocks(&self) -> &ModeBlocks {
        &self.l_blocks
    }

    pub fn sl_blocks(&self) -> &ModeBlocks {
        &self.sl_blocks
    }

    pub fn nonlinearity(&self) -> &Arc<dyn Nonlinearity> {
        &self.nonlinearity
    }

    /// Checks that `state` lives on this model's grid with the right number of components.
    pub fn check_state(&self, state: &State) -> Result<()> {
        if state.n_components() != self.c || **state.grid() != *self.grid {
            return Err(Error::ShapeMismatch(format!(
                "state with {} components on {:?} does not match model {} ({} components on {:?})",
                state.n_components(),
                state.grid(),
                self.name,
                self.c,
                self.grid
            )));
        }
        Ok(())
    }

    pub fn apply_s(&self, z: &State) -> State {
        self.s_blocks.apply(z)
    }

    pub fn apply_l(&self, z: &State) -> State {
        self.l_blocks.apply(z)
    }

    pub fn apply_sl(&self, z: &State) -> State {
        self.sl_blocks.apply(z)
    }

    /// Pointwise `N(z)`.
    pub fn n_density(&self, z: &State) -> Vec<f64> {
        let c = self.c;
        let mut buf = [0.0; 4];
        (0..self.grid.len())
            .map(|p| {
                for a in 0..c {
                    buf[a] = z.component(a)[p];
                }
                self.nonlinearity.density(&buf[..c])
            })
            .collect()
    }

    /// Pointwise `N'(z)`.
    pub fn n_grad(&self, z: &State) -> State {
        let c = self.c;
        let n = self.grid.len();
        let mut out = vec![vec![0.0; n]; c];
        let mut zin = [0.0; 4];
        let mut g = [0.0; 4];
        for p in 0..n {
            for a in 0..c {
                zin[a] = z.component(a)[p];
            }
            self.nonlinearity.gradient(&zin[..c], &mut g[..c]);
            for a in 0..c {
                out[a][p] = g[a];
            }
        }
        State::from_parts(self.grid.clone(), out)
    }

    /// `F(z) = (N(z), 1)`.
    pub fn nonlinear_energy(&self, z: &State) -> f64 {
        self.n_density(z).iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `(N(a) − N(b), 1)` accumulated pointwise, which keeps the difference
    /// accurate when `a` and `b` are close.
    pub fn nonlinear_energy_difference(&self, a: &State, b: &State) -> f64 {
        let na = self.n_density(a);
        let nb = self.n_density(b);
        na.iter().zip(&nb).map(|(x, y)| x - y).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn energy(&self, z: &State) -> EnergyReport {
        let quadratic = 0.5 * inner_product(z, &self.apply_l(z));
        let nonlinear = self.nonlinear_energy(z);
        EnergyReport {
            quadratic,
            nonlinear,
            total: quadratic + nonlinear,
        }
    }

    /// Linear part of the vector field, `S L z`.
    pub fn f1(&self, z: &State) -> State {
        self.apply_sl(z)
    }

    /// Nonlinear part of the vector field, `S N'(z)`.
    pub fn f2(&self, z: &State) -> State {
        self.apply_s(&self.n_grad(z))
    }

    /// Full right-hand side `S (L z + N'(z))`.
    pub fn vector_field(&self, z: &State) -> State {
        let mut g = self.apply_l(z);
        g.axpy(1.0, &self.n_grad(z));
        self.apply_s(&g)
    }
}

fn skew_pair(_: &crate::spectral::Wavevector, b: &mut [Complex64]) {
    b[1] = Complex64::new(1.0, 0.0);
    b[2] = Complex64::new(-1.0, 0.0);
}

fn require_dim(grid: &Grid, dim: usize, what: &str) -> Result<()> {
    if grid.dim() != dim {
        return Err(Error::InvalidGrid(format!(
            "{what} needs a {dim}-dimensional grid, got {}",
            grid.dim()
        )));
    }
    Ok(())
}
