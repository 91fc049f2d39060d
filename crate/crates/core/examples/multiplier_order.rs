//! How the prediction sweeps approach the Gauss stages, and how far the
//! multiplier strays from 1, as the step shrinks.

use std::sync::Arc;

use hamlag::harness::selftest::{loglog_slope, prediction_contact};
use hamlag::{Grid, Model, Result, Scheme, SchemeConfig, State, Trajectory};

fn max_lambda_deviation(model: &Arc<Model>, z0: &State, cfg: SchemeConfig) -> Result<f64> {
    let steps = (1.0 / cfg.dt).round() as usize;
    let scheme = Scheme::new(model.clone(), cfg)?;
    let mut traj = Trajectory::new(&scheme, z0.clone())?;
    let mut worst = 0.0f64;
    for _ in 0..steps {
        worst = worst.max((traj.step()?.lambda - 1.0).abs());
    }
    Ok(worst)
}

fn main() -> Result<()> {
    println!("stage contact of Λ sweeps, Gauss-2");
    for sweeps in 1..=3 {
        let (dts, errs) = prediction_contact(2, sweeps)?;
        println!("  Λ = {sweeps}: slope {:.2}", loglog_slope(&dts, &errs));
    }

    let grid = Grid::new_1d(0.0, 2.0 * std::f64::consts::PI, 64)?;
    let model = Arc::new(Model::kdv(1.0, 0.2, grid.clone())?);
    let u = grid.map_points(|p| 0.5 * p[0].cos() + 0.3 * (2.0 * p[0]).sin() + 0.2);
    let z0 = State::new(grid, vec![u])?;

    println!("max |λ - 1| over t in [0, 1]");
    for (s, sweeps) in [(2, 2), (2, 4), (3, 6)] {
        let mut line = format!("  s = {s}, Λ = {sweeps}:");
        for k in 0..4 {
            let mut cfg = SchemeConfig::lm_gauss(s, 0.05 / 2f64.powi(k)).with_sweeps(sweeps);
            cfg.newton_min_iter = 1;
            line += &format!(" {:.2e}", max_lambda_deviation(&model, &z0, cfg)?);
        }
        println!("{line}");
    }
    Ok(())
}
