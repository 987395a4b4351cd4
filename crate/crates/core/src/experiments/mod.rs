//! Multi-seed studies: no-selection baseline, mutation-rate and alpha
//! sweeps, and report emission.

pub mod report;
mod sweep;

pub use report::{
    emit_report, render_report, Algorithm, ReportFormat, RunOutcome, RunReport, SweepAxis, SweepPoint, SweepSummary,
};
pub use sweep::{
    alpha_sweep, baseline_no_selection, default_mutation_grid, fast_slow_ensemble, ga_ensemble, mean_std,
    mutation_sweep, Preset,
};
