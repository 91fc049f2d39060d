use std::sync::Arc;

use num_complex::Complex64;

use super::{Grid, Spectrum};
use crate::error::{Error, Result};

/// Multi-component real field on a [`Grid`].
///
/// A state produced in Fourier space keeps its coefficients, and linear
/// combinations of such states combine them too. Time steppers therefore
/// never round-trip the solution through the FFT, whose small systematic
/// bias would otherwise accumulate with the number of steps.
#[derive(Clone, Debug)]
pub struct State {
    grid: Arc<Grid>,
    comps: Vec<Vec<f64>>,
    spectrum: Option<Spectrum>,
}

impl State {
    pub fn new(grid: Arc<Grid>, comps: Vec<Vec<f64>>) -> Result<State> {
        if comps.is_empty() {
            return Err(Error::ShapeMismatch("state needs at least one component".into()));
        }
        for (i, c) in comps.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(Error::ShapeMismatch(format!(
                    "component {i} has {} values, grid has {} points",
                    c.len(),
                    grid.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::ShapeMismatch(format!("component {i} has non-finite values")));
            }
        }
        Ok(State {
            grid,
            comps,
            spectrum: None,
        })
    }

    pub fn zeros(grid: Arc<Grid>, n_components: usize) -> State {
        let n = grid.len();
        State {
            grid,
            comps: vec![vec![0.0; n]; n_components],
            spectrum: None,
        }
    }

    pub(crate) fn from_parts(grid: Arc<Grid>, comps: Vec<Vec<f64>>) -> State {
        State {
            grid,
            comps,
            spectrum: None,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn n_components(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.comps[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut [f64] {
        self.spectrum = None;
        &mut self.comps[i]
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.comps
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &State) {
        debug_assert_eq!(self.n_components(), other.n_components());
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            x.iter_mut().zip(y).for_each(|(x, y)| *x += a * y);
        }
        match (&mut self.spectrum, &other.spectrum) {
            (Some(x), Some(y)) => {
                for (x, y) in x.iter_mut().zip(y) {
                    x.iter_mut().zip(y).for_each(|(x, y)| *x += a * y);
                }
            }
            _ => self.spectrum = None,
        }
    }

    /// `self + a * other`
    pub fn add_scaled(&self, a: f64, other: &State) -> State {
        let mut out = self.clone();
        out.axpy(a, other);
        out
    }

    pub fn scaled(&self, a: f64) -> State {
        let mut out = self.map(|v| a * v);
        out.spectrum = self.spectrum.as_ref().map(|spec| {
            spec.iter()
                .map(|c| c.iter().map(|v| a * v).collect())
                .collect()
        });
        out
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> State {
        State {
            grid: self.grid.clone(),
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|&v| f(v)).collect())
                .collect(),
            spectrum: None,
        }
    }

    /// Maximum absolute value over all points and components.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete maximum norm of `self - other`.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Spatial mean of one component.
    pub fn mean(&self, component: usize) -> f64 {
        self.comps[component].iter().sum::<f64>() / self.grid.len() as f64
    }

    pub fn to_spectrum(&self) -> Spectrum {
        match &self.spectrum {
            Some(spec) => spec.clone(),
            None => self.comps.iter().map(|c| self.grid.forward(c)).collect(),
        }
    }

    pub fn from_spectrum(grid: Arc<Grid>, spec: &[Vec<Complex64>]) -> State {
        let comps = spec.iter().map(|c| grid.inverse(c)).collect();
        State {
            grid,
            comps,
            spectrum: Some(spec.to_vec()),
        }
    }
}
