//! Experiment orchestration: configuration, drivers and CSV output.

mod config;
mod experiments;
mod output;
mod params;

pub use config::{emit_config, parse_config, ConfigError, ExperimentConfig, ExperimentKind, Section};
pub use experiments::{
    capacity_experiment, detect_artifact, detect_experiment, eigen_cdf_experiment, focusing_experiment, marchenko_pastur_check,
    marchenko_pastur_edges, multicell_artifacts, multicell_experiment, neumann_bench, precoding_experiment, run_experiment,
    run_experiment_with, EigenCdfResult, EigenSet, FocusGrid, FocusingResult,
};
pub use output::{artifact_path, fmt_f64, provenance_line, write_artifacts, Artifact, VERSION};
pub use params::{CapacityParams, DetectParams, EigenCdfParams, ExperimentParams, FocusingParams, NeumannBenchParams, PrecodingParams};
