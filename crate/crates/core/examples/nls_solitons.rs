//! NLS two-soliton collision with LM-GAUSS2, tracking energy and mass.

use std::sync::Arc;

use hamlag::models::{InitialCondition, NLS_DOMAIN};
use hamlag::spectral::inner_product;
use hamlag::{Grid, Model, Result, Scheme, SchemeConfig, Trajectory};

fn main() -> Result<()> {
    let grid = Grid::new_1d(NLS_DOMAIN.0, NLS_DOMAIN.1, 256)?;
    let model = Arc::new(Model::nls(1.0, grid)?);
    let z0 = InitialCondition::NlsTwoSoliton.state(&model)?;
    let (h0, m0) = (model.energy(&z0).total, inner_product(&z0, &z0));

    let scheme = Scheme::new(model.clone(), SchemeConfig::lm_gauss(2, 0.02))?;
    let mut traj = Trajectory::new(&scheme, z0)?;
    println!("{:>6} {:>12} {:>12} {:>8}", "t", "energy drift", "mass drift", "|u|max");
    for _ in 0..10 {
        for _ in 0..100 {
            traj.step()?;
        }
        let z = traj.state();
        let peak = (0..z.grid().len())
            .map(|i| z.component(0)[i].hypot(z.component(1)[i]))
            .fold(0.0, f64::max);
        println!(
            "{:>6.1} {:>12.2e} {:>12.2e} {:>8.4}",
            traj.time(),
            (model.energy(z).total - h0) / h0.abs(),
            (inner_product(z, z) - m0) / m0,
            peak
        );
    }
    Ok(())
}
