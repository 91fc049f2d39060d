//! Convergence ladders and scheme comparisons, run cell-parallel.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrators::SchemeConfig;
use crate::models::Model;
use crate::spectral::State;

use super::config::{ExperimentConfig, ReferenceMode};
use super::run::{format_float, run_from, RunReport};

/// Environment variable capping the number of concurrently running cells.
pub const THREADS_ENV: &str = "HAMLAG_THREADS";

/// Fine-reference step is `Δt₀ / REFERENCE_REFINEMENT`.
pub const REFERENCE_REFINEMENT: f64 = 64.0;

/// Errors below `FLOOR_FACTOR·ε·max|ref|` are roundoff.
pub const FLOOR_FACTOR: f64 = 1e2;

/// Runs `f` on a pool sized by `HAMLAG_THREADS`, or the default pool size.
pub fn with_cell_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::ConfigInvalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::ConfigInvalid(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Observed order of a ladder cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Order {
    /// First rung, or a rung next to a failed one.
    None,
    Value(f64),
    /// One of the two errors sits at roundoff level.
    Floor,
}

impl Order {
    pub fn value(&self) -> Option<f64> {
        match self {
            Order::Value(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::None => Ok(()),
            Order::Value(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{}", format_float(*v)),
            },
            Order::Floor => write!(f, "floor"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceCell {
    pub scheme: String,
    pub dt: f64,
    pub outcome: std::result::Result<CellResult, String>,
    pub order: Order,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub error: f64,
    pub max_drift: f64,
    pub max_lambda_deviation: f64,
    pub mean_iters: f64,
    pub floor: bool,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub cells: Vec<ConvergenceCell>,
    /// `max|ref|`, the scale of the floor test.
    pub reference_scale: f64,
}

impl ConvergenceTable {
    pub fn scheme_cells<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a ConvergenceCell> + 'a {
        self.cells.iter().filter(move |c| c.scheme == label)
    }

    /// Non-floor observed orders of one scheme.
    pub fn orders(&self, label: &str) -> Vec<f64> {
        self.scheme_cells(label).filter_map(|c| c.order.value()).collect()
    }

    pub fn first_failure(&self) -> Option<(&ConvergenceCell, &str)> {
        self.cells
            .iter()
            .find_map(|c| c.outcome.as_ref().err().map(|e| (c, e.as_str())))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scheme", "dt", "error", "order", "max_drift", "max_lambda_dev", "mean_iters"])?;
        for c in &self.cells {
            let mut rec = vec![c.scheme.clone(), format_float(c.dt)];
            match &c.outcome {
                Ok(r) => rec.extend([
                    format_float(r.error),
                    c.order.to_string(),
                    format_float(r.max_drift),
                    format_float(r.max_lambda_deviation),
                    format_float(r.mean_iters),
                ]),
                Err(e) => rec.extend([format!("failed: {e}"), String::new(), String::new(), String::new(), String::new()]),
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn emit_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Observed orders `log₂(e_{k−1}/e_k)` along one ladder of errors, `None`
/// marking failed rungs.
pub fn ladder_orders(errors: &[Option<f64>], floor: f64) -> Vec<Order> {
    let mut orders = vec![Order::None; errors.len()];
    for k in 1..errors.len() {
        if let (Some(p), Some(e)) = (errors[k - 1], errors[k]) {
            orders[k] = if p < floor || e < floor {
                Order::Floor
            } else {
                Order::Value((p / e).log2())
            };
        }
    }
    orders
}

/// Reference solution at `t_final` for the configured ladder.
pub fn reference_solution(cfg: &ExperimentConfig, model: &Arc<Model>, z0: &State) -> Result<State> {
    match cfg.reference {
        ReferenceMode::Exact => cfg.initial.exact(model, cfg.t_final).ok_or_else(|| {
            Error::ConfigInvalid(format!("no exact solution is known for {:?}", cfg.initial))
        }),
        ReferenceMode::GaussFp => {
            let reference = SchemeConfig::gauss_fp(3, cfg.dt / REFERENCE_REFINEMENT);
            Ok(run_from(cfg, &reference, model, z0)?.final_state)
        }
    }
}

/// Every `(scheme, Δt₀/2^k)` cell of the ladder; failed cells are kept as
/// such so the rest of the table stays usable.
pub fn convergence_cells(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    if cfg.ladder_depth < 2 {
        return Err(Error::ConfigInvalid("a convergence study needs ladder_depth >= 2".into()));
    }
    let model = cfg.build_model()?;
    let z0 = cfg.initial_state(&model)?;
    let schemes = cfg.scheme_configs()?;
    let jobs: Vec<SchemeConfig> = schemes
        .iter()
        .flat_map(|s| (0..=cfg.ladder_depth).map(move |k| s.clone().with_dt(cfg.dt / 2f64.powi(k as i32))))
        .collect();

    let (reference, runs) = with_cell_pool(|| {
        rayon::join(
            || reference_solution(cfg, &model, &z0),
            || {
                jobs.par_iter()
                    .map(|s| run_from(cfg, s, &model, &z0))
                    .collect::<Vec<Result<RunReport>>>()
            },
        )
    })?;
    let reference = reference?;
    let scale = reference.max_abs();
    let floor = FLOOR_FACTOR * f64::EPSILON * scale;

    let outcomes: Vec<_> = runs
        .into_iter()
        .map(|run| {
            run.map(|r| {
                let error = r.final_state.max_abs_diff(&reference);
                CellResult {
                    error,
                    max_drift: r.summary.max_drift,
                    max_lambda_deviation: r.summary.max_lambda_deviation,
                    mean_iters: r.summary.mean_iters,
                    floor: error < floor,
                }
            })
            .map_err(|e| e.to_string())
        })
        .collect();
    let orders: Vec<Order> = outcomes
        .chunks(cfg.ladder_depth + 1)
        .flat_map(|rungs| ladder_orders(&rungs.iter().map(|o| o.as_ref().ok().map(|c| c.error)).collect::<Vec<_>>(), floor))
        .collect();
    let cells = jobs
        .iter()
        .zip(outcomes)
        .zip(orders)
        .map(|((job, outcome), order)| ConvergenceCell {
            scheme: job.label(),
            dt: job.dt,
            outcome,
            order,
        })
        .collect();
    Ok(ConvergenceTable {
        cells,
        reference_scale: scale,
    })
}

/// Convergence study that fails on the first failing cell.
pub fn convergence_study(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    let table = convergence_cells(cfg)?;
    if let Some((cell, e)) = table.first_failure() {
        return Err(Error::ConfigInvalid(format!("{} at dt = {}: {e}", cell.scheme, cell.dt)));
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub scheme: String,
    pub steps: usize,
    pub max_drift: f64,
    pub max_modified_drift: Option<f64>,
    pub mean_iters: f64,
    pub max_iters: usize,
    pub max_lambda_deviation: f64,
    pub wall_ns: u64,
}

/// Runs every configured scheme at the base `Δt` and tabulates drift,
/// iteration counts and wall time.
pub fn compare_schemes(cfg: &ExperimentConfig) -> Result<Vec<ComparisonRow>> {
    cfg.validate()?;
    let schemes = cfg.scheme_configs()?;
    if schemes.len() < 2 {
        return Err(Error::ConfigInvalid("comparison needs at least two schemes".into()));
    }
    let model = cfg.build_model()?;
    let z0 = cfg.initial_state(&model)?;
    let runs = with_cell_pool(|| {
        schemes
            .par_iter()
            .map(|s| run_from(cfg, s, &model, &z0))
            .collect::<Vec<_>>()
    })?;
    runs.into_iter()
        .map(|r| {
            let s = r?.summary;
            Ok(ComparisonRow {
                scheme: s.scheme,
                steps: s.steps,
                max_drift: s.max_drift,
                max_modified_drift: s.max_modified_drift,
                mean_iters: s.mean_iters,
                max_iters: s.max_iters,
                max_lambda_deviation: s.max_lambda_deviation,
                wall_ns: s.total_ns,
            })
        })
        .collect()
}

pub fn write_comparison<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "steps",
        "max_drift",
        "max_modified_drift",
        "mean_iters",
        "max_iters",
        "max_lambda_dev",
        "wall_ns",
    ])?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            r.steps.to_string(),
            format_float(r.max_drift),
            r.max_modified_drift.map(format_float).unwrap_or_default(),
            format_float(r.mean_iters),
            r.max_iters.to_string(),
            format_float(r.max_lambda_deviation),
            r.wall_ns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_comparison_csv(rows: &[ComparisonRow], path: impl AsRef<Path>) -> Result<()> {
    write_comparison(rows, std::io::BufWriter::new(std::fs::File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::InitialCondition;

    fn kdv(schemes: &[&str]) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::testbed(InitialCondition::KdvOneSoliton, 64, 0.004, 0.04);
        cfg.schemes = schemes.iter().map(|&s| s.into()).collect();
        cfg.ladder_depth = 2;
        cfg
    }

    #[test]
    fn ladder_shape_and_orders() {
        let table = convergence_study(&kdv(&["sav-cn", "lm-gauss2"])).unwrap();
        assert_eq!(table.cells.len(), 6);
        assert_eq!(table.cells[0].order, Order::None);
        assert_eq!(table.cells[3].order, Order::None);
        let dts: Vec<f64> = table.scheme_cells("sav-cn").map(|c| c.dt).collect();
        assert_eq!(dts, vec![0.004, 0.002, 0.001]);
        for o in table.orders("sav-cn") {
            assert!((o - 2.0).abs() < 0.3, "{o}");
        }
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("scheme,dt,error,order,"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn orders_from_errors() {
        let o = ladder_orders(&[Some(1e-2), Some(2.5e-3), None, Some(1e-4), Some(1e-20)], 1e-14);
        assert_eq!(o[0], Order::None);
        assert!((o[1].value().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!((o[2], o[3], o[4]), (Order::None, Order::None, Order::Floor));
        assert_eq!(Order::Floor.to_string(), "floor");
    }

    #[test]
    fn exact_solution_as_integrator_hits_floor() {
        let mut cfg = kdv(&["gauss-fp3"]);
        cfg.reference = ReferenceMode::Exact;
        let model = cfg.build_model().unwrap();
        let z0 = cfg.initial_state(&model).unwrap();
        let exact = reference_solution(&cfg, &model, &z0).unwrap();
        let floor = FLOOR_FACTOR * f64::EPSILON * exact.max_abs();
        // the test double re-evaluates the closed form, perturbed at roundoff level
        let errors: Vec<Option<f64>> = (0..4)
            .map(|k| {
                let double = cfg.initial.exact(&model, cfg.t_final).unwrap().map(|u| u * (1.0 + k as f64 * f64::EPSILON));
                Some(double.max_abs_diff(&exact))
            })
            .collect();
        assert!(errors.iter().all(|e| e.unwrap() < 1e-14));
        let orders = ladder_orders(&errors, floor);
        assert!(orders[1..].iter().all(|o| *o == Order::Floor));
    }

    #[test]
    fn exact_reference_requires_a_solution() {
        let mut cfg = ExperimentConfig::testbed(InitialCondition::NlsOneSoliton, 32, 0.05, 0.1);
        cfg.schemes = vec!["lm-gauss2".into()];
        cfg.reference = ReferenceMode::Exact;
        cfg.ladder_depth = 2;
        assert!(matches!(convergence_cells(&cfg), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn shallow_ladder_rejected() {
        let mut cfg = kdv(&["sav-cn"]);
        cfg.ladder_depth = 1;
        assert!(matches!(convergence_cells(&cfg), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn comparison_needs_two_schemes() {
        assert!(matches!(compare_schemes(&kdv(&["lm-cn"])), Err(Error::ConfigInvalid(_))));
        let rows = compare_schemes(&kdv(&["sav-cn", "lm-gauss2"])).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].max_modified_drift.is_some());
        assert!(rows[1].max_modified_drift.is_none());
        assert_eq!(rows[1].steps, 10);
    }
}
