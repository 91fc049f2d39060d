//! Original and modified energy drift, iterations and wall time of every
//! scheme on the KdV one-soliton.

use hamlag::harness::{compare_schemes, ExperimentConfig};
use hamlag::models::InitialCondition;

fn main() -> hamlag::Result<()> {
    let cfg = ExperimentConfig::testbed(InitialCondition::KdvOneSoliton, 128, 0.002, 2.0)
        .with_schemes(["lm-cn", "sav-cn", "lm-gauss2", "lm-gauss3", "gauss-fp3"]);
    let rows = compare_schemes(&cfg)?;

    println!(
        "{:<10} {:>11} {:>11} {:>7} {:>5} {:>9}",
        "scheme", "drift", "modified", "iters", "max", "time [s]"
    );
    for r in &rows {
        let modified = r.max_modified_drift.map_or("-".to_string(), |m| format!("{m:.2e}"));
        println!(
            "{:<10} {:>11.2e} {:>11} {:>7.2} {:>5} {:>9.3}",
            r.scheme,
            r.max_drift,
            modified,
            r.mean_iters,
            r.max_iters,
            r.wall_ns as f64 * 1e-9
        );
    }
    Ok(())
}
