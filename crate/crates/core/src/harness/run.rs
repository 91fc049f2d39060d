//! Single trajectory runs and their CSV series.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrators::{Scheme, SchemeConfig, SchemeKind, Trajectory};
use crate::models::Model;
use crate::spectral::State;

use super::config::ExperimentConfig;

/// One row of a run's time series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    /// `(H − H⁰)/|H⁰|`, or the absolute change when `H⁰ = 0`.
    pub drift: f64,
    pub modified_energy: Option<f64>,
    pub modified_drift: Option<f64>,
    pub lambda: f64,
    pub iters: usize,
    pub wall_ns: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub scheme: String,
    pub steps: usize,
    pub max_drift: f64,
    pub max_modified_drift: Option<f64>,
    pub mean_iters: f64,
    pub max_iters: usize,
    pub max_lambda_deviation: f64,
    pub total_ns: u64,
    /// Max-norm distance to the exact solution at `T`, when one is known.
    pub final_error: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub series: Vec<SeriesRow>,
    pub summary: RunSummary,
    pub final_state: State,
}

impl RunReport {
    pub fn has_modified_energy(&self) -> bool {
        self.series.first().is_some_and(|r| r.modified_energy.is_some())
    }

    pub fn emit_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let kind = if self.has_modified_energy() {
            SchemeKind::SavCn
        } else {
            SchemeKind::LmCn
        };
        emit_csv(&self.series, kind, path)
    }
}

fn relative_change(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value - reference
    } else {
        (value - reference) / reference.abs()
    }
}

/// Runs `scheme` from the configured initial state to `t_final`.
pub fn run_trajectory(cfg: &ExperimentConfig, scheme: &SchemeConfig) -> Result<RunReport> {
    let model = cfg.build_model()?;
    let z0 = cfg.initial_state(&model)?;
    run_from(cfg, scheme, &model, &z0)
}

pub(crate) fn run_from(
    cfg: &ExperimentConfig,
    scheme: &SchemeConfig,
    model: &Arc<Model>,
    z0: &State,
) -> Result<RunReport> {
    let steps = cfg.step_count(scheme.dt)?;
    let stepper = Scheme::new(model.clone(), scheme.clone())?;
    let mut traj = Trajectory::new(&stepper, z0.clone())?;

    let e0 = model.energy(z0);
    let m0 = traj.sav_variable().map(|r| e0.quadratic + r * r);
    let mut series = Vec::with_capacity(steps);
    let start = Instant::now();
    for step in 0..steps {
        let t0 = Instant::now();
        let rec = traj.step().map_err(|e| Error::StepFailed {
            step,
            source: Box::new(e),
        })?;
        let wall_ns = t0.elapsed().as_nanos() as u64;
        series.push(SeriesRow {
            step: step + 1,
            t: rec.t_end,
            energy: rec.energy.total,
            drift: relative_change(rec.energy.total, e0.total),
            modified_energy: rec.modified_energy,
            modified_drift: rec.modified_energy.zip(m0).map(|(m, m0)| relative_change(m, m0)),
            lambda: rec.lambda,
            iters: rec.iterations,
            wall_ns,
        });
    }
    let total_ns = start.elapsed().as_nanos() as u64;
    let final_state = traj.into_state();
    let final_error = cfg
        .initial
        .exact(model, cfg.t_final)
        .map(|exact| final_state.max_abs_diff(&exact));

    let max_abs = |f: &dyn Fn(&SeriesRow) -> f64| series.iter().map(f).fold(0.0f64, |a, v| a.max(v.abs()));
    let summary = RunSummary {
        scheme: scheme.label(),
        steps,
        max_drift: max_abs(&|r| r.drift),
        max_modified_drift: m0.map(|_| max_abs(&|r| r.modified_drift.unwrap_or(0.0))),
        mean_iters: series.iter().map(|r| r.iters as f64).sum::<f64>() / steps as f64,
        max_iters: series.iter().map(|r| r.iters).max().unwrap_or(0),
        max_lambda_deviation: max_abs(&|r| r.lambda - 1.0),
        total_ns,
        final_error,
    };
    Ok(RunReport {
        series,
        summary,
        final_state,
    })
}

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column set of a series CSV.
pub fn series_header(kind: SchemeKind) -> Vec<&'static str> {
    let mut h = vec!["step", "t", "energy", "drift"];
    if kind == SchemeKind::SavCn {
        h.extend(["modified_energy", "modified_drift"]);
    }
    h.extend(["lambda", "iters", "wall_ns"]);
    h
}

/// Writes a run's series as CSV. SAV runs carry two extra columns.
pub fn emit_csv(series: &[SeriesRow], kind: SchemeKind, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_series(series, kind, std::io::BufWriter::new(file))
}

pub fn write_series<W: Write>(series: &[SeriesRow], kind: SchemeKind, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(series_header(kind))?;
    for r in series {
        let mut rec = vec![r.step.to_string(), format_float(r.t), format_float(r.energy), format_float(r.drift)];
        if kind == SchemeKind::SavCn {
            rec.push(format_float(r.modified_energy.unwrap_or(f64::NAN)));
            rec.push(format_float(r.modified_drift.unwrap_or(f64::NAN)));
        }
        rec.extend([format_float(r.lambda), r.iters.to_string(), r.wall_ns.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
