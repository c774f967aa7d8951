// SPDX-License-Identifier: Apache-2.0

//! Column-wise write-and-verify.

mod config;
mod engine;
mod verify;

pub use config::{Scheme, WvConfig};
pub(crate) use engine::run_wv_with as engine_run;
pub use engine::{run_column, run_wv, ColumnRun, IterationRecord, StreakCounter, WvResult};
pub use verify::{decide, Decision, SweepOutcome, Verifier};
