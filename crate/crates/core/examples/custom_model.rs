//! A user-defined Hamiltonian PDE: the focusing φ⁴ wave equation
//! `u_tt = u_xx − u + u³` as a first-order system in `(u, u_t)`.

use std::sync::Arc;

use num_complex::Complex64;

use hamlag::models::Nonlinearity;
use hamlag::spectral::ModeBlocks;
use hamlag::{Grid, Model, Result, Scheme, SchemeConfig, State, Trajectory};

#[derive(Debug)]
struct Quartic;

impl Nonlinearity for Quartic {
    fn density(&self, z: &[f64]) -> f64 {
        -0.25 * z[0].powi(4)
    }

    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        out[0] = -z[0].powi(3);
        out[1] = 0.0;
    }
}

fn main() -> Result<()> {
    let grid = Grid::new_1d(-20.0, 20.0, 256)?;
    let s = ModeBlocks::from_fn(&grid, 2, |_, b| {
        b[1] = Complex64::new(1.0, 0.0);
        b[2] = Complex64::new(-1.0, 0.0);
    });
    let l = ModeBlocks::from_fn(&grid, 2, |w, b| {
        b[0] = Complex64::new(w.k[0] * w.k[0] + 1.0, 0.0);
        b[3] = Complex64::new(1.0, 0.0);
    });
    let model = Arc::new(Model::new("phi4", grid.clone(), s, l, Arc::new(Quartic))?);

    let u = grid.map_points(|p| 0.8 / p[0].cosh());
    let z0 = State::new(grid.clone(), vec![u, vec![0.0; grid.len()]])?;
    let h0 = model.energy(&z0).total;

    let scheme = Scheme::new(model.clone(), SchemeConfig::lm_gauss(2, 0.05))?;
    let mut traj = Trajectory::new(&scheme, z0)?;
    for _ in 0..5 {
        let mut worst = 0.0f64;
        for _ in 0..40 {
            let rec = traj.step()?;
            worst = worst.max(((rec.energy.total - h0) / h0).abs());
        }
        println!("t = {:4.1}  u(0) = {:+.4}  max drift {worst:.2e}", traj.time(), traj.state().component(0)[grid.len() / 2]);
    }
    Ok(())
}
