//! Fourier pseudo-spectral core on periodic uniform grids.
//!
//! Fields are stored row-major (`idx = i * ny + j` in 2D, the first axis is
//! `x`). The forward DFT is unscaled and the inverse is scaled by `1/N`, so
//! spectral coefficients never leak into public contracts: everything that
//! leaves this module is a physical-space field.

mod blocks;
mod grid;
mod state;

pub use blocks::{solve_mode_block_system, ModeBlocks, StageSolver};
pub use grid::{Axis, Grid, Wavevector};
pub use state::State;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Per-component spectral coefficients.
pub type Spectrum = Vec<Vec<Complex64>>;

/// Unscaled DFT of a real field.
pub fn forward_transform(grid: &Grid, field: &[f64]) -> Vec<Complex64> {
    grid.forward(field)
}

/// Inverse DFT (scaled by `1/N`), keeping the real part.
pub fn inverse_transform(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    grid.inverse(coeffs)
}

/// Pseudo-spectral derivative of order `order` along `axis`.
///
/// Odd orders use wavenumbers with the Nyquist mode zeroed so that real
/// fields stay real.
pub fn spectral_derivative(grid: &Grid, field: &[f64], axis: usize, order: u32) -> Result<Vec<f64>> {
    if !(1..=3).contains(&order) {
        return Err(Error::UnsupportedDerivativeOrder(order));
    }
    if axis >= grid.dim() {
        return Err(Error::ShapeMismatch(format!(
            "axis {axis} on a {}-dimensional grid",
            grid.dim()
        )));
    }
    if field.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!(
            "field of length {} on a grid of {} points",
            field.len(),
            grid.len()
        )));
    }
    let mut coeffs = grid.forward(field);
    for (mode, c) in coeffs.iter_mut().enumerate() {
        let w = grid.wavevector(mode);
        let k = if order % 2 == 1 { w.k_odd[axis] } else { w.k[axis] };
        // (i k)^q
        let symbol = match order {
            1 => Complex64::new(0.0, k),
            2 => Complex64::new(-k * k, 0.0),
            _ => Complex64::new(0.0, -k * k * k),
        };
        *c *= symbol;
    }
    Ok(grid.inverse(&coeffs))
}

/// Discrete L² inner product: cell volume times the sum over all points and
/// components of `a·b`.
pub fn inner_product(a: &State, b: &State) -> f64 {
    debug_assert_eq!(a.n_components(), b.n_components());
    let sum: f64 = a
        .components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .sum();
    sum * a.grid().cell_volume()
}
