//! Linearly implicit, energy-preserving time integration for Hamiltonian PDEs.
//!
//! A Hamiltonian PDE `z_t = S (L z + N'(z))` with skew-adjoint `S`, symmetric
//! non-negative `L` and nonlinear energy density `N` conserves
//! `H(z) = ½(z, Lz) + (N(z), 1)`. The schemes in [`integrators`] multiply the
//! nonlinear force by a scalar Lagrange multiplier chosen every step so that
//! the discrete `H` is conserved exactly, while only constant-coefficient
//! linear systems are ever solved:
//!
//! * LM-CN, a second-order Crank–Nicolson variant,
//! * LM-GAUSS, a prediction–correction scheme built on `s`-stage Gauss
//!   collocation with order `min(2s, Λ)`,
//! * SAV-CN and a fixed-point solved Gauss method as baselines.
//!
//! Spatial discretization is Fourier pseudo-spectral on periodic 1D/2D grids
//! ([`spectral`]); the KdV, NLS and 2D sine-Gordon testbeds live in
//! [`models`], and [`harness`] drives trajectories, convergence studies and
//! scheme comparisons with CSV output.

pub mod error;
pub mod harness;
pub mod integrators;
pub mod models;
pub mod spectral;
pub mod tableau;

pub use error::{Error, Result};
pub use integrators::{Startup, Scheme, SchemeConfig, SchemeKind, StepRecord, Trajectory};
pub use models::{EnergyReport, Model};
pub use spectral::{Grid, State};
pub use tableau::ButcherTableau;
