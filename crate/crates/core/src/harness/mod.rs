// SPDX-License-Identifier: Apache-2.0

//! Experiment orchestration, configuration files and reporting.

pub mod config;
pub mod experiment;
pub mod selftest;
pub mod stats;

use std::path::PathBuf;

pub use config::KvConfig;
pub use experiment::{
    evaluate, run_experiment, run_trials, trial_codes, trial_stream, write_outputs, Evaluation,
    ExperimentKind, ExperimentOutput, ExperimentSpec, OutputFormat, RatioRow,
};
pub use selftest::{run_selftest, Check};
pub use stats::{Moments, SummaryStats, TrialRecord};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RRAM_WV_OUT";

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("rram-wv-out"))
}
