use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One periodic axis `[lo, hi)` sampled at `n` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }
}

/// Wavenumbers of a single Fourier mode. `k_odd` has the Nyquist entry
/// zeroed and is the one to use in odd-order symbols.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wavevector {
    pub k: [f64; 2],
    pub k_odd: [f64; 2],
}

impl Wavevector {
    /// `|k|²`, summed over the axes of the grid (unused axes hold zero).
    pub fn norm_sq(&self) -> f64 {
        self.k[0] * self.k[0] + self.k[1] * self.k[1]
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic uniform tensor-product grid in one or two dimensions, with its
/// wavenumber tables and FFT plans.
pub struct Grid {
    axes: Vec<Axis>,
    wavenumbers: Vec<Vec<f64>>,
    odd_wavenumbers: Vec<Vec<f64>>,
    plans: Vec<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("axes", &self.axes).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Arc<Grid>> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "expected 1 or 2 axes, got {}",
                axes.len()
            )));
        }
        let mut planner = FftPlanner::new();
        let mut wavenumbers = Vec::with_capacity(axes.len());
        let mut odd_wavenumbers = Vec::with_capacity(axes.len());
        let mut plans = Vec::with_capacity(axes.len());
        for axis in &axes {
            if axis.n < 4 || axis.n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "points per axis must be even and at least 4, got {}",
                    axis.n
                )));
            }
            if !(axis.lo.is_finite() && axis.hi.is_finite()) || axis.length() <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "axis bounds [{}, {}] are not an increasing finite interval",
                    axis.lo, axis.hi
                )));
            }
            let n = axis.n;
            let scale = 2.0 * PI / axis.length();
            let k: Vec<f64> = (0..n)
                .map(|m| {
                    let signed = if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
                    scale * signed as f64
                })
                .collect();
            let mut k_odd = k.clone();
            k_odd[n / 2] = 0.0;
            wavenumbers.push(k);
            odd_wavenumbers.push(k_odd);
            plans.push(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            });
        }
        Ok(Arc::new(Grid {
            axes,
            wavenumbers,
            odd_wavenumbers,
            plans,
        }))
    }

    pub fn new_1d(lo: f64, hi: f64, n: usize) -> Result<Arc<Grid>> {
        Grid::new(vec![Axis { lo, hi, n }])
    }

    pub fn new_2d(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Arc<Grid>> {
        Grid::new(vec![
            Axis { lo: x.0, hi: x.1, n: x.2 },
            Axis { lo: y.0, hi: y.1, n: y.2 },
        ])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, axis: usize) -> &Axis {
        &self.axes[axis]
    }

    /// Total number of grid points (equal to the number of Fourier modes).
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `Δx` (`Δx·Δy` in 2D).
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Measure of the periodic domain.
    pub fn volume(&self) -> f64 {
        self.axes.iter().map(Axis::length).product()
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    pub fn coordinates(&self, axis: usize) -> Vec<f64> {
        let a = &self.axes[axis];
        let h = a.spacing();
        (0..a.n).map(|j| a.lo + j as f64 * h).collect()
    }

    fn split(&self, idx: usize) -> [usize; 2] {
        match self.axes.len() {
            1 => [idx, 0],
            _ => {
                let ny = self.axes[1].n;
                [idx / ny, idx % ny]
            }
        }
    }

    /// Wavenumbers of the flat mode index `mode` (same layout as fields).
    pub fn wavevector(&self, mode: usize) -> Wavevector {
        let ij = self.split(mode);
        let mut w = Wavevector {
            k: [0.0; 2],
            k_odd: [0.0; 2],
        };
        for axis in 0..self.dim() {
            w.k[axis] = self.wavenumbers[axis][ij[axis]];
            w.k_odd[axis] = self.odd_wavenumbers[axis][ij[axis]];
        }
        w
    }

    /// Coordinates of the flat point index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let ij = self.split(idx);
        let mut p = [0.0; 2];
        for axis in 0..self.dim() {
            let a = &self.axes[axis];
            p[axis] = a.lo + ij[axis] as f64 * a.spacing();
        }
        p
    }

    /// Samples `f` at every grid point; `f` receives `[x]` or `[x, y]`.
    pub fn map_points<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        let d = self.dim();
        (0..self.len()).map(|idx| f(&self.point(idx)[..d])).collect()
    }

    /// Unscaled DFT of a real field.
    pub fn forward(&self, field: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    /// Inverse DFT scaled by `1/N`, real part only.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse_in_place(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len(), "buffer does not match grid");
        self.transform(buf, |p| &p.forward);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len(), "buffer does not match grid");
        self.transform(buf, |p| &p.inverse);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    fn transform<F>(&self, buf: &mut [Complex64], pick: F)
    where
        F: Fn(&Plans) -> &Arc<dyn Fft<f64>>,
    {
        match self.axes.len() {
            1 => pick(&self.plans[0]).process(buf),
            _ => {
                let (nx, ny) = (self.axes[0].n, self.axes[1].n);
                // rows (contiguous, along y)
                pick(&self.plans[1]).process(buf);
                // columns via transpose
                let mut t = vec![Complex64::new(0.0, 0.0); nx * ny];
                for i in 0..nx {
                    for j in 0..ny {
                        t[j * nx + i] = buf[i * ny + j];
                    }
                }
                pick(&self.plans[0]).process(&mut t);
                for i in 0..nx {
                    for j in 0..ny {
                        buf[i * ny + j] = t[j * nx + i];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_axes() {
        assert!(Grid::new_1d(0.0, 1.0, 2).is_err());
        assert!(Grid::new_1d(0.0, 1.0, 7).is_err());
        assert!(Grid::new_1d(1.0, 1.0, 8).is_err());
        assert!(Grid::new(vec![]).is_err());
    }

    #[test]
    fn wavenumber_table() {
        let g = Grid::new_1d(-3.0, 5.0, 8).unwrap();
        let k = g.wavenumbers(0);
        assert_eq!(k.len(), 8);
        assert_eq!(k[0], 0.0);
        let base = 2.0 * PI / 8.0;
        assert!((k[1] - base).abs() < 1e-15);
        assert!((k[4] + 4.0 * base).abs() < 1e-15);
        assert!((k[7] + base).abs() < 1e-15);
        assert_eq!(g.wavevector(4).k_odd[0], 0.0);
        assert!((g.axis(0).spacing() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_layout() {
        let g = Grid::new_2d((0.0, 4.0, 4), (0.0, 8.0, 8)).unwrap();
        assert_eq!(g.len(), 32);
        assert_eq!(g.point(9), [1.0, 1.0]);
        let w = g.wavevector(1 * 8 + 2);
        assert!((w.k[0] - 2.0 * PI / 4.0).abs() < 1e-15);
        assert!((w.k[1] - 2.0 * 2.0 * PI / 8.0).abs() < 1e-15);
        assert!((g.cell_volume() - 1.0).abs() < 1e-15);
    }
}
