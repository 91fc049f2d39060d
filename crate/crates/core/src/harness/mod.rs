//! Experiment driver: JSON configs in, CSV tables out.
//!
//! * [`run_trajectory`] steps one scheme to `T` and records per-step energy,
//!   drift, multiplier and iteration counts.
//! * [`convergence_study`] runs a `Δt` ladder per scheme against an exact or
//!   fine GAUSS-FP reference.
//! * [`compare_schemes`] tabulates drift, iterations and wall time.

mod config;
mod run;
pub mod selftest;
mod study;

pub use config::{
    ExperimentConfig, GridSpec, ModelSpec, ReferenceMode, SchemeEntry, SchemeOverrides, MAX_LADDER_DEPTH,
};
pub use run::{emit_csv, format_float, run_trajectory, series_header, write_series, RunReport, RunSummary, SeriesRow};
pub use study::{
    compare_schemes, convergence_cells, convergence_study, emit_comparison_csv, ladder_orders, reference_solution,
    with_cell_pool, write_comparison, CellResult, ComparisonRow, ConvergenceCell, ConvergenceTable, Order,
    FLOOR_FACTOR, REFERENCE_REFINEMENT, THREADS_ENV,
};
