// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("order {0} is not a power of two")]
    NonPowerOfTwo(usize),
    #[error("order {0} outside supported range 2..=1024")]
    OrderOutOfRange(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ternary entry {0} not in {{-1, 0, +1}}")]
    InvalidTernaryEntry(i32),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid array dimensions {rows}x{cols}")]
    InvalidDimensions { rows: usize, cols: usize },
    #[error("coarse pulses may only SET")]
    CoarseResetForbidden,
    #[error("cell ({row}, {col}) outside {rows}x{cols} array")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("pulse count must be at least 1")]
    ZeroPulseCount,
    #[error("level {level} outside 0..={max}")]
    LevelOutOfRange { level: i64, max: i64 },
    #[error("target code {code} outside ADC range {lo}..={hi}")]
    TargetOutOfRange { code: i64, lo: i64, hi: i64 },
    #[error("target {target} not representable with the configured precision (|max| = {max})")]
    TargetNotRepresentable { target: i64, max: i64 },
    #[error("code {code} outside signed {bits}-bit range")]
    CodeOutOfRange { code: i64, bits: u32 },
    #[error("unknown cost event kind {0}")]
    UnknownEventKind(String),
    #[error("inconsistent configuration: {0}")]
    ConfigInconsistent(String),
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("weight container: {0}")]
    Container(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot write {path}: {message}")]
    OutputUnwritable { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    pub(crate) fn unwritable(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::OutputUnwritable {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
