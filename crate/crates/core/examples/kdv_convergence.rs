//! Temporal convergence table on the KdV one-soliton, written to CSV.

use hamlag::harness::{convergence_study, ExperimentConfig};
use hamlag::models::InitialCondition;

fn main() -> hamlag::Result<()> {
    let cfg = ExperimentConfig::testbed(InitialCondition::KdvOneSoliton, 128, 0.002, 1.0)
        .with_schemes(["sav-cn", "lm-gauss2", "lm-gauss3"]);
    let table = convergence_study(&cfg)?;

    println!("{:<10} {:>10} {:>12} {:>8}", "scheme", "dt", "error", "order");
    for cell in &table.cells {
        let err = cell.outcome.as_ref().map(|r| r.error).unwrap_or(f64::NAN);
        println!("{:<10} {:>10} {:>12.4e} {:>8}", cell.scheme, cell.dt, err, format!("{:.4}", cell.order));
    }

    let path = std::env::temp_dir().join("hamlag_kdv_convergence.csv");
    table.emit_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
