//! Experiment harness: configuration, repeated runs, CSV output and plots.

pub mod config;
pub mod experiment;
pub mod plot;

pub use config::{apply_overrides, ExperimentConfig, PriorDimSpec, PriorKind, PriorSection, Strategy};
pub use experiment::{
    aggregate, aggregate_csv, beta_sweep, derive_seed, log10_regret, repetition_prior, run_experiment,
    run_repetition, run_repetitions, trace_csv, AggregateRow, ExperimentReport, RunOutcome, SweepReport,
};
pub use plot::{load_series, plot, render_svg, PlotSeries};
