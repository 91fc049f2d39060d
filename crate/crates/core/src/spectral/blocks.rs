use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Grid, Spectrum, State, Wavevector};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Mode counts at or above this are solved in parallel.
const PAR_MODES: usize = 4096;

/// Condition estimates above this are reported as singular.
const MAX_CONDITION: f64 = 1e14;

/// Table of dense `c×c` complex symbols, one per Fourier mode, for a
/// constant-coefficient operator acting on `c`-component fields.
#[derive(Clone, Debug)]
pub struct ModeBlocks {
    c: usize,
    data: Vec<Complex64>,
}

impl ModeBlocks {
    /// Builds the table by calling `symbol` once per mode. The closure fills
    /// a row-major `c×c` block.
    pub fn from_fn<F>(grid: &Grid, c: usize, symbol: F) -> ModeBlocks
    where
        F: Fn(&Wavevector, &mut [Complex64]),
    {
        let mut data = vec![ZERO; grid.len() * c * c];
        for (mode, block) in data.chunks_mut(c * c).enumerate() {
            symbol(&grid.wavevector(mode), block);
        }
        ModeBlocks { c, data }
    }

    pub fn n_components(&self) -> usize {
        self.c
    }

    pub fn n_modes(&self) -> usize {
        self.data.len() / (self.c * self.c)
    }

    pub fn block(&self, mode: usize) -> &[Complex64] {
        let cc = self.c * self.c;
        &self.data[mode * cc..(mode + 1) * cc]
    }

    /// Per-mode matrix product `self · rhs`, i.e. the symbol of the
    /// composition `self ∘ rhs`.
    pub fn compose(&self, rhs: &ModeBlocks) -> ModeBlocks {
        assert_eq!(self.c, rhs.c);
        let c = self.c;
        let mut data = vec![ZERO; self.data.len()];
        for (mode, out) in data.chunks_mut(c * c).enumerate() {
            let a = self.block(mode);
            let b = rhs.block(mode);
            for i in 0..c {
                for j in 0..c {
                    out[i * c + j] = (0..c).map(|k| a[i * c + k] * b[k * c + j]).sum();
                }
            }
        }
        ModeBlocks { c, data }
    }

    /// Applies the symbol mode by mode to a spectrum.
    pub fn apply_spectrum(&self, spec: &[Vec<Complex64>]) -> Spectrum {
        let c = self.c;
        assert_eq!(spec.len(), c);
        let n = self.n_modes();
        let mut out = vec![vec![ZERO; n]; c];
        for mode in 0..n {
            let m = self.block(mode);
            for i in 0..c {
                let mut acc = ZERO;
                for j in 0..c {
                    let v = m[i * c + j];
                    if v != ZERO {
                        acc += v * spec[j][mode];
                    }
                }
                out[i][mode] = acc;
            }
        }
        out
    }

    /// Applies the operator to a physical-space state.
    pub fn apply(&self, state: &State) -> State {
        let spec = state.to_spectrum();
        State::from_spectrum(state.grid().clone(), &self.apply_spectrum(&spec))
    }
}

/// Dense LU with partial pivoting of one small complex matrix, stored in
/// place; `piv[i]` is the row swapped into position `i`.
fn lu_factor(a: &mut [Complex64], piv: &mut [usize], n: usize) -> bool {
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].norm();
        for r in (k + 1)..n {
            let v = a[r * n + k].norm();
            if v > best {
                best = v;
                p = r;
            }
        }
        piv[k] = p;
        if best == 0.0 {
            return false;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
        }
        let inv = ONE / a[k * n + k];
        for r in (k + 1)..n {
            let f = a[r * n + k] * inv;
            a[r * n + k] = f;
            if f != ZERO {
                for j in (k + 1)..n {
                    let t = a[k * n + j];
                    a[r * n + j] -= f * t;
                }
            }
        }
    }
    true
}

fn lu_solve(lu: &[Complex64], piv: &[usize], n: usize, x: &mut [Complex64]) {
    for k in 0..n {
        x.swap(k, piv[k]);
    }
    for i in 0..n {
        let mut acc = x[i];
        for j in 0..i {
            acc -= lu[i * n + j] * x[j];
        }
        x[i] = acc;
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in (i + 1)..n {
            acc -= lu[i * n + j] * x[j];
        }
        x[i] = acc / lu[i * n + i];
    }
}

fn norm1(a: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Cached solver for the coupled stage system `(I − Δt·(A ⊗ M_k)) y = r`,
/// factored once per `(Δt, A)` for every Fourier mode `k`.
///
/// Unknowns are ordered stage-major: index `i·c + a` is component `a` of
/// stage `i`.
#[derive(Clone, Debug)]
pub struct StageSolver {
    grid: Arc<Grid>,
    stages: usize,
    c: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

impl StageSolver {
    pub fn new(grid: Arc<Grid>, blocks: &ModeBlocks, a: &[Vec<f64>], dt: f64) -> Result<StageSolver> {
        let s = a.len();
        let c = blocks.n_components();
        let n = s * c;
        if blocks.n_modes() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} mode blocks for a grid of {} modes",
                blocks.n_modes(),
                grid.len()
            )));
        }
        let modes = grid.len();
        let mut lu = vec![ZERO; modes * n * n];
        let mut piv = vec![0usize; modes * n];
        let factor = |(mode, (m, p)): (usize, (&mut [Complex64], &mut [usize]))| -> Result<()> {
            let blk = blocks.block(mode);
            for i in 0..s {
                for ca in 0..c {
                    let row = i * c + ca;
                    for j in 0..s {
                        for cb in 0..c {
                            let col = j * c + cb;
                            let id = if row == col { ONE } else { ZERO };
                            m[row * n + col] = id - dt * a[i][j] * blk[ca * c + cb];
                        }
                    }
                }
            }
            let anorm = norm1(m, n);
            if !lu_factor(m, p, n) {
                return Err(Error::SingularModeBlock {
                    mode,
                    condition: f64::INFINITY,
                });
            }
            // ‖M⁻¹‖₁ from the columns of the inverse
            let mut inv_norm = 0.0f64;
            let mut e = vec![ZERO; n];
            for col in 0..n {
                e.iter_mut().for_each(|v| *v = ZERO);
                e[col] = ONE;
                lu_solve(m, p, n, &mut e);
                inv_norm = inv_norm.max(e.iter().map(|v| v.norm()).sum());
            }
            let condition = anorm * inv_norm;
            if !condition.is_finite() || condition > MAX_CONDITION {
                return Err(Error::SingularModeBlock { mode, condition });
            }
            Ok(())
        };
        if modes >= PAR_MODES {
            lu.par_chunks_mut(n * n)
                .zip(piv.par_chunks_mut(n))
                .enumerate()
                .try_for_each(factor)?;
        } else {
            lu.chunks_mut(n * n)
                .zip(piv.chunks_mut(n))
                .enumerate()
                .try_for_each(factor)?;
        }
        Ok(StageSolver {
            grid,
            stages: s,
            c,
            lu,
            piv,
        })
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Solves in place on spectra, `rhs[stage][component][mode]`.
    pub fn solve_spectral(&self, rhs: &mut [Spectrum]) {
        let (s, c) = (self.stages, self.c);
        let n = s * c;
        assert_eq!(rhs.len(), s);
        let modes = self.grid.len();
        let mut out = vec![ZERO; modes * n];
        let work = |(mode, x): (usize, &mut [Complex64])| {
            for i in 0..s {
                for a in 0..c {
                    x[i * c + a] = rhs[i][a][mode];
                }
            }
            lu_solve(
                &self.lu[mode * n * n..(mode + 1) * n * n],
                &self.piv[mode * n..(mode + 1) * n],
                n,
                x,
            );
        };
        if modes >= PAR_MODES {
            out.par_chunks_mut(n).enumerate().for_each(work);
        } else {
            out.chunks_mut(n).enumerate().for_each(work);
        }
        for (mode, x) in out.chunks(n).enumerate() {
            for i in 0..s {
                for a in 0..c {
                    rhs[i][a][mode] = x[i * c + a];
                }
            }
        }
    }

    /// Solves for physical-space stage states.
    pub fn solve(&self, rhs: &[State]) -> Vec<State> {
        let mut spec: Vec<Spectrum> = rhs.iter().map(State::to_spectrum).collect();
        self.solve_spectral(&mut spec);
        spec.iter()
            .map(|sp| State::from_spectrum(self.grid.clone(), sp))
            .collect()
    }
}

/// One-shot form of [`StageSolver`]: factors and solves
/// `(I − Δt·(A ⊗ M_k)) y_k = r_k` for every mode.
pub fn solve_mode_block_system(
    grid: &Arc<Grid>,
    blocks: &ModeBlocks,
    a: &[Vec<f64>],
    dt: f64,
    rhs: &[State],
) -> Result<Vec<State>> {
    if !(dt > 0.0) {
        return Err(Error::ConfigInvalid(format!("time step must be positive, got {dt}")));
    }
    if rhs.len() != a.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} stage right-hand sides for a {}-stage matrix",
            rhs.len(),
            a.len()
        )));
    }
    Ok(StageSolver::new(grid.clone(), blocks, a, dt)?.solve(rhs))
}
