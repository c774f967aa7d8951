// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo simulation of write-and-verify programming for multi-level
//! RRAM crossbar columns.
//!
//! Four verify schemes share one column-wise write backend:
//!
//! - **CW-SC**: one-hot reads with a compare-only ADC.
//! - **Multi-read**: `M` full conversions per cell, averaged.
//! - **HD-PV**: Hadamard-pattern reads, full conversions, inverse-Hadamard
//!   decode. Uncorrelated read noise drops by `1/N` and the common-mode
//!   offset lands on the first decoded cell only.
//! - **HARP**: Hadamard-pattern reads compared against Hadamard-domain
//!   targets; the ternary outcomes are decoded to update directions.
//!
//! Latency and energy are accumulated per hardware event in a [`CostLedger`].

pub mod adc;
pub mod channel;
pub mod container;
pub mod cost;
pub mod device;
pub mod error;
pub mod exec;
pub mod hadamard;
pub mod harness;
pub mod mapper;
pub mod rng;
pub mod wv;

pub use adc::{AdcConfig, CompareOutcome, Outcome, SamplingRef};
pub use channel::{ColumnPair, CommonModeMode, NoiseParams, SweepContext};
pub use container::WeightContainer;
pub use cost::{CostLedger, CostParams, DecodeClass, EventKind};
pub use device::{CellArray, DeviceParams, Direction, PulseMode, PulseTarget};
pub use error::{Error, Result};
pub use exec::Execution;
pub use hadamard::{estimator_variance, HadamardMatrix, ReadBasis};
pub use mapper::{program_tensor, quantize, readback_effective, slice_code, MappedTensor};
pub use rng::SeedStream;
pub use wv::{decide, run_wv, Decision, Scheme, WvConfig, WvResult};
