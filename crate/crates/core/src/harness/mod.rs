//! Monte-Carlo experiment harness: configuration, trials, sweeps, SIR
//! calibration and report emission.

pub mod calibrate;
pub mod config;
pub mod experiment;
pub mod output;

pub use calibrate::{calibrate_interference_scale, Calibration};
pub use config::{parse_config, AlgorithmSelector, BerSpec, LinkConfig, SnrAverage};
pub use experiment::{
    aggregate, compare, compare_at, default_noise_grid, log_grid, sweep_alpha, sweep_noise,
    Algorithm, AlgorithmTag, ComparePoint, Experiment, MetricsRecord, Runner, TrialRecord,
};
pub use output::{csv_string, emit_csv, emit_plot_data, read_csv, write_channel_csv};
