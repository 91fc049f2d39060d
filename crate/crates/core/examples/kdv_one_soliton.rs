//! KdV one-soliton with LM-CN and LM-GAUSS3: energy drift and error against
//! the travelling exact solution.

use std::sync::Arc;

use hamlag::models::{InitialCondition, KDV_ONE_SOLITON_DOMAIN, KDV_ONE_SOLITON_MU2};
use hamlag::{Grid, Model, Result, Scheme, SchemeConfig, Trajectory};

fn main() -> Result<()> {
    let (lo, hi) = KDV_ONE_SOLITON_DOMAIN;
    let grid = Grid::new_1d(lo, hi, 128)?;
    let model = Arc::new(Model::kdv(1.0, KDV_ONE_SOLITON_MU2.sqrt(), grid)?);
    let z0 = InitialCondition::KdvOneSoliton.state(&model)?;
    let h0 = model.energy(&z0).total;

    let dt = 0.002;
    for cfg in [SchemeConfig::lm_cn(dt), SchemeConfig::lm_gauss(3, dt)] {
        let scheme = Scheme::new(model.clone(), cfg.clone())?;
        let mut traj = Trajectory::new(&scheme, z0.clone())?;
        println!("{}", cfg.label());
        for chunk in 1..=5 {
            let mut drift = 0.0f64;
            for _ in 0..500 {
                let rec = traj.step()?;
                drift = drift.max(((rec.energy.total - h0) / h0).abs());
            }
            let exact = InitialCondition::KdvOneSoliton.exact(&model, traj.time()).unwrap();
            println!(
                "  t = {:4.1}  max drift {drift:.2e}  error {:.3e}",
                f64::from(chunk),
                traj.state().max_abs_diff(&exact)
            );
        }
    }
    Ok(())
}
