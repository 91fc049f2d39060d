//! Time-stepping schemes.
//!
//! Every scheme splits the vector field into `f₁(z) = S L z`, which is
//! treated implicitly through cached per-mode solves, and `f₂(z) = S N'(z)`,
//! which only ever appears at known states:
//!
//! * [`SchemeKind::LmCn`]: Crank–Nicolson with the nonlinear force scaled by
//!   a multiplier `λ` that restores exact conservation of `H`.
//! * [`SchemeKind::LmGauss`]: `Λ` linearized Gauss sweeps predict the stages,
//!   then a multiplier-corrected Gauss step conserves `H`.
//! * [`SchemeKind::SavCn`]: scalar auxiliary variable Crank–Nicolson, which
//!   conserves a modified energy instead.
//! * [`SchemeKind::GaussFp`]: the fully implicit Gauss method solved by
//!   fixed-point iteration, used as an accuracy reference.

mod gauss;
mod lm_cn;
mod newton;
mod sav;

pub use gauss::GaussCorrection;
pub use newton::{accept_multiplier, newton_scalar, MultiplierSolve, MULTIPLIER_WINDOW};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{EnergyReport, Model};
use crate::spectral::{inner_product, Spectrum, StageSolver, State};
use crate::tableau::{gauss_tableau, ButcherTableau};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    LmCn,
    LmGauss,
    SavCn,
    GaussFp,
}

/// How the CN-type schemes build their first extrapolant, where no
/// previous state exists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Startup {
    /// [`startup_extrapolant`].
    #[default]
    ExplicitHalfStep,
    /// Average of `z⁰` and one implicit-midpoint step, solved by fixed
    /// point. Needed when `(N'(z⁰), f₁(z⁰))` vanishes, e.g. for symmetric
    /// solitons or data starting from rest.
    Midpoint,
}

/// Scheme selection and solver tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Gauss stage count; ignored by the Crank–Nicolson kinds.
    pub stages: usize,
    /// Prediction sweeps `Λ` for LM-GAUSS; `None` means `Λ = 2s`.
    pub sweeps: Option<usize>,
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Newton updates taken even when `λ = 1` already meets the tolerance;
    /// resolves `λ − 1` below the stopping threshold.
    pub newton_min_iter: usize,
    pub sav_c0: f64,
    pub fp_tol: f64,
    pub fp_max_sweeps: usize,
    pub startup: Startup,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, stages: usize, dt: f64) -> SchemeConfig {
        SchemeConfig {
            kind,
            stages,
            sweeps: None,
            dt,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            newton_min_iter: 0,
            sav_c0: 1.0,
            fp_tol: 1e-14,
            fp_max_sweeps: 200,
            startup: Startup::ExplicitHalfStep,
        }
    }

    pub fn lm_cn(dt: f64) -> SchemeConfig {
        SchemeConfig::new(SchemeKind::LmCn, 1, dt)
    }

    pub fn sav_cn(dt: f64) -> SchemeConfig {
        SchemeConfig::new(SchemeKind::SavCn, 1, dt)
    }

    pub fn lm_gauss(stages: usize, dt: f64) -> SchemeConfig {
        SchemeConfig::new(SchemeKind::LmGauss, stages, dt)
    }

    pub fn gauss_fp(stages: usize, dt: f64) -> SchemeConfig {
        SchemeConfig::new(SchemeKind::GaussFp, stages, dt)
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> SchemeConfig {
        self.sweeps = Some(sweeps);
        self
    }

    pub fn with_startup(mut self, startup: Startup) -> SchemeConfig {
        self.startup = startup;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> SchemeConfig {
        self.dt = dt;
        self
    }

    /// Effective `Λ`.
    pub fn prediction_sweeps(&self) -> usize {
        self.sweeps.unwrap_or(2 * self.stages)
    }

    /// Classical order of the scheme: 2 for the CN kinds, `2s` for Gauss,
    /// `min(2s, Λ)` for LM-GAUSS.
    pub fn order(&self) -> usize {
        match self.kind {
            SchemeKind::LmCn | SchemeKind::SavCn => 2,
            SchemeKind::GaussFp => 2 * self.stages,
            SchemeKind::LmGauss => (2 * self.stages).min(self.prediction_sweeps()),
        }
    }

    /// Short identifier such as `lm-cn`, `lm-gauss3` or `lm-gauss2:3`.
    pub fn label(&self) -> String {
        SchemeId::from(self).to_string()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::ConfigInvalid(format!("time step must be positive, got {}", self.dt)));
        }
        if matches!(self.kind, SchemeKind::LmGauss | SchemeKind::GaussFp) && !(1..=3).contains(&self.stages) {
            return Err(Error::UnsupportedStages(self.stages));
        }
        if self.kind == SchemeKind::LmGauss && self.prediction_sweeps() == 0 {
            return Err(Error::ConfigInvalid("LM-GAUSS needs at least one prediction sweep".into()));
        }
        if !(self.newton_tol > 0.0) || !(self.fp_tol > 0.0) {
            return Err(Error::ConfigInvalid("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Parsed form of a scheme identifier: `lm-cn`, `sav-cn`, `lm-gauss<s>[:Λ]`
/// or `gauss-fp<s>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchemeId {
    pub kind: SchemeKind,
    pub stages: usize,
    pub sweeps: Option<usize>,
}

impl SchemeId {
    pub fn config(&self, dt: f64) -> SchemeConfig {
        let mut c = SchemeConfig::new(self.kind, self.stages, dt);
        c.sweeps = self.sweeps;
        c
    }
}

impl From<&SchemeConfig> for SchemeId {
    fn from(c: &SchemeConfig) -> SchemeId {
        let sweeps = match c.kind {
            SchemeKind::LmGauss => c.sweeps.filter(|&l| l != 2 * c.stages),
            _ => None,
        };
        SchemeId {
            kind: c.kind,
            stages: c.stages,
            sweeps,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SchemeKind::LmCn => write!(f, "lm-cn"),
            SchemeKind::SavCn => write!(f, "sav-cn"),
            SchemeKind::GaussFp => write!(f, "gauss-fp{}", self.stages),
            SchemeKind::LmGauss => {
                write!(f, "lm-gauss{}", self.stages)?;
                if let Some(l) = self.sweeps {
                    write!(f, ":{l}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<SchemeId> {
        let bad = || Error::ConfigInvalid(format!("unknown scheme id {s:?}"));
        let id = s.trim().to_ascii_lowercase();
        let parse_n = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match id.as_str() {
            "lm-cn" => Ok(SchemeId { kind: SchemeKind::LmCn, stages: 1, sweeps: None }),
            "sav-cn" => Ok(SchemeId { kind: SchemeKind::SavCn, stages: 1, sweeps: None }),
            _ => {
                if let Some(rest) = id.strip_prefix("lm-gauss") {
                    let (s, l) = match rest.split_once(':') {
                        Some((s, l)) => (parse_n(s)?, Some(parse_n(l)?)),
                        None => (parse_n(rest)?, None),
                    };
                    Ok(SchemeId { kind: SchemeKind::LmGauss, stages: s, sweeps: l })
                } else if let Some(rest) = id.strip_prefix("gauss-fp") {
                    Ok(SchemeId { kind: SchemeKind::GaussFp, stages: parse_n(rest)?, sweeps: None })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub t_end: f64,
    /// Multiplier of the step; 1 for schemes without one.
    pub lambda: f64,
    /// Newton updates (LM kinds) or fixed-point sweeps (GAUSS-FP).
    pub iterations: usize,
    pub energy: EnergyReport,
    /// `½(z, Lz) + r²` for SAV-CN.
    pub modified_energy: Option<f64>,
    /// The nonlinear force vanished and `λ` was set to 1.
    pub degenerate: bool,
    /// `(N'(z̃), k)` was too small for the multiplier to be well determined.
    pub near_orthogonal: bool,
}

/// A scheme bound to a model, with its linear stage systems factored.
#[derive(Clone, Debug)]
pub struct Scheme {
    model: Arc<Model>,
    cfg: SchemeConfig,
    tableau: ButcherTableau,
    solver: StageSolver,
}

impl Scheme {
    pub fn new(model: impl Into<Arc<Model>>, cfg: SchemeConfig) -> Result<Scheme> {
        let model = model.into();
        cfg.validate()?;
        let stages = match cfg.kind {
            SchemeKind::LmCn | SchemeKind::SavCn => 1,
            _ => cfg.stages,
        };
        let tableau = gauss_tableau(stages)?;
        let solver = StageSolver::new(model.grid().clone(), model.sl_blocks(), &tableau.a, cfg.dt)?;
        Ok(Scheme {
            model,
            cfg,
            tableau,
            solver,
        })
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    pub fn dt(&self) -> f64 {
        self.cfg.dt
    }

    fn to_states(&self, spec: &[Spectrum]) -> Vec<State> {
        spec.iter()
            .map(|s| State::from_spectrum(self.model.grid().clone(), s))
            .collect()
    }

    /// Spectrum of `f₂(z) = S N'(z)`.
    fn f2_spectrum(&self, z: &State) -> Spectrum {
        self.model.s_blocks().apply_spectrum(&self.model.n_grad(z).to_spectrum())
    }

    /// `ẑ + Δt Σ_j a_ij f̂_j` for each stage `i`.
    fn stage_rhs(&self, z_hat: &Spectrum, f_hat: &[Spectrum]) -> Vec<Spectrum> {
        let dt = self.cfg.dt;
        let a = &self.tableau.a;
        (0..self.tableau.stages())
            .map(|i| {
                let mut r = z_hat.clone();
                for (j, fj) in f_hat.iter().enumerate() {
                    let w = dt * a[i][j];
                    if w != 0.0 {
                        add_scaled_spectrum(&mut r, w, fj);
                    }
                }
                r
            })
            .collect()
    }

    /// Solves the multiplier equation shared by the LM schemes,
    /// `g(λ) = (N(base + λ·dir) − N(z), 1) − λ·(lin + λ·quad)`,
    /// by Newton from 1 with the analytic derivative.
    fn solve_multiplier(&self, base: &State, dir: &State, z: &State, lin: f64, quad: f64) -> Result<MultiplierSolve> {
        let model = &self.model;
        let c = model.n_components();
        let npts = model.grid().len();
        let vol = model.grid().cell_volume();
        let nl = model.nonlinearity();
        let n_z = model.n_density(z);
        let scale = model.nonlinear_energy(z).abs().max(1.0);
        let eval = |lambda: f64| {
            let mut w = [0.0; 4];
            let mut g = [0.0; 4];
            let mut diff = 0.0;
            let mut slope = 0.0;
            for p in 0..npts {
                for a in 0..c {
                    w[a] = base.component(a)[p] + lambda * dir.component(a)[p];
                }
                diff += nl.density(&w[..c]) - n_z[p];
                nl.gradient(&w[..c], &mut g[..c]);
                for a in 0..c {
                    slope += g[a] * dir.component(a)[p];
                }
            }
            let value = diff * vol - lambda * (lin + lambda * quad);
            let deriv = slope * vol - lin - 2.0 * lambda * quad;
            (value, deriv)
        };
        let mut solve = newton_scalar(&eval, 1.0, self.cfg.newton_tol, scale, self.cfg.newton_max_iter)?;
        while solve.iterations < self.cfg.newton_min_iter {
            let (g, dg) = eval(solve.lambda);
            if !(dg.abs() >= 1e-300) {
                break;
            }
            solve.lambda -= g / dg;
            solve.residual = eval(solve.lambda).0;
            solve.iterations += 1;
        }
        accept_multiplier(solve)
    }

    fn is_degenerate(&self, forces: &[&State], z: &State) -> bool {
        let scale = z.max_abs().max(1.0);
        forces.iter().all(|f| f.max_abs() < 1e-14 * scale)
    }

    fn record(&self, t_end: f64, z: &State, lambda: f64, iterations: usize) -> StepRecord {
        StepRecord {
            t_end,
            lambda,
            iterations,
            energy: self.model.energy(z),
            modified_energy: None,
            degenerate: false,
            near_orthogonal: false,
        }
    }
}

/// `z⁰ + (Δt/2)·(f₁(z⁰) + f₂(z⁰))`: explicit half step that stands in for
/// the extrapolant `(3zⁿ − zⁿ⁻¹)/2` on the first CN-type step.
pub fn startup_extrapolant(model: &Model, z0: &State, dt: f64) -> State {
    if dt == 0.0 {
        return z0.clone();
    }
    z0.add_scaled(0.5 * dt, &model.vector_field(z0))
}

/// Drives a scheme step by step, keeping the history the CN-type schemes
/// need for their extrapolant and the SAV auxiliary variable.
#[derive(Clone, Debug)]
pub struct Trajectory<'a> {
    scheme: &'a Scheme,
    state: State,
    prev: Option<State>,
    sav_r: Option<f64>,
    steps: usize,
}

impl<'a> Trajectory<'a> {
    pub fn new(scheme: &'a Scheme, z0: State) -> Result<Trajectory<'a>> {
        scheme.model.check_state(&z0)?;
        let sav_r = match scheme.cfg.kind {
            SchemeKind::SavCn => {
                let v = scheme.model.nonlinear_energy(&z0) + scheme.cfg.sav_c0;
                if !(v > 0.0) {
                    return Err(Error::SavSqrtDomain { value: v });
                }
                Some(v.sqrt())
            }
            _ => None,
        };
        Ok(Trajectory {
            scheme,
            state: z0,
            prev: None,
            sav_r,
            steps: 0,
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn into_state(self) -> State {
        self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.scheme.cfg.dt
    }

    /// Current SAV variable `r`, for SAV-CN runs.
    pub fn sav_variable(&self) -> Option<f64> {
        self.sav_r
    }

    fn extrapolant(&self) -> Result<State> {
        let s = self.scheme;
        Ok(match (&self.prev, s.cfg.startup) {
            (Some(prev), _) => {
                let mut z = self.state.scaled(1.5);
                z.axpy(-0.5, prev);
                z
            }
            (None, Startup::ExplicitHalfStep) => startup_extrapolant(&s.model, &self.state, s.cfg.dt),
            (None, Startup::Midpoint) => {
                let (z1, _) = s.gauss_fp_step(&self.state)?;
                let mut z = self.state.scaled(0.5);
                z.axpy(0.5, &z1);
                z
            }
        })
    }

    pub fn step(&mut self) -> Result<StepRecord> {
        let s = self.scheme;
        let t_end = (self.steps + 1) as f64 * s.cfg.dt;
        let (next, mut rec) = match s.cfg.kind {
            SchemeKind::LmCn => {
                let zt = self.extrapolant()?;
                s.lm_cn_step(&self.state, &zt)?
            }
            SchemeKind::SavCn => {
                let zt = self.extrapolant()?;
                let r = self.sav_r.expect("SAV run without auxiliary variable");
                let (next, r_next, rec) = s.sav_cn_step(&self.state, r, &zt)?;
                self.sav_r = Some(r_next);
                (next, rec)
            }
            SchemeKind::LmGauss => s.lm_gauss_step(&self.state)?,
            SchemeKind::GaussFp => s.gauss_fp_step(&self.state)?,
        };
        rec.t_end = t_end;
        self.prev = Some(std::mem::replace(&mut self.state, next));
        self.steps += 1;
        Ok(rec)
    }
}

fn add_scaled_spectrum(dst: &mut Spectrum, a: f64, src: &Spectrum) {
    for (d, s) in dst.iter_mut().zip(src) {
        d.iter_mut().zip(s).for_each(|(d, s)| *d += a * s);
    }
}

fn scale_spectrum(spec: &mut Spectrum, a: f64) {
    spec.iter_mut().flatten().for_each(|v| *v *= a);
}

fn zero_spectrum(c: usize, n: usize) -> Spectrum {
    vec![vec![Complex64::new(0.0, 0.0); n]; c]
}

/// `Σ_i w_i (x_i, y_i)`.
fn weighted_inner(weights: &[f64], x: &[State], y: &[State]) -> f64 {
    weights
        .iter()
        .zip(x.iter().zip(y))
        .map(|(w, (a, b))| w * inner_product(a, b))
        .sum()
}
