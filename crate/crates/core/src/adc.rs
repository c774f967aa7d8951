// SPDX-License-Identifier: Apache-2.0

//! Behavioral SAR ADC with full conversion and one-shot target comparison.

use serde::{Deserialize, Serialize};

use crate::cost::{CostLedger, EventKind};
use crate::error::{Error, Result};

/// Sampling reference of the capacitor array. `Ground` digitizes the
/// unsigned range used by the all-ones pattern; `HalfVcm` centers the range
/// on zero for balanced patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingRef {
    Ground,
    HalfVcm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdcConfig {
    pub resolution: u32,
    pub sampling_ref: SamplingRef,
    /// ADC code step in read-channel LSB.
    pub full_scale_lsb: f64,
}

impl AdcConfig {
    pub fn new(resolution: u32) -> Self {
        AdcConfig {
            resolution,
            sampling_ref: SamplingRef::HalfVcm,
            full_scale_lsb: 1.0,
        }
    }

    pub fn with_ref(mut self, r: SamplingRef) -> Self {
        self.sampling_ref = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=16).contains(&self.resolution) {
            return Err(Error::ConfigInconsistent(
                "ADC resolution must be in 2..=16 bits".into(),
            ));
        }
        if !(self.full_scale_lsb > 0.0 && self.full_scale_lsb.is_finite()) {
            return Err(Error::ConfigInconsistent("ADC step must be positive".into()));
        }
        Ok(())
    }

    pub fn code_range(&self) -> (i64, i64) {
        let n = self.resolution;
        match self.sampling_ref {
            SamplingRef::Ground => (0, (1i64 << n) - 1),
            SamplingRef::HalfVcm => (-(1i64 << (n - 1)), (1i64 << (n - 1)) - 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Low,
    Equal,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompareOutcome {
    pub outcome: Outcome,
    pub comparisons_used: u8,
}

impl CompareOutcome {
    /// Ternary sign of `measurement − target`.
    pub fn sign(self) -> i8 {
        match self.outcome {
            Outcome::Low => -1,
            Outcome::Equal => 0,
            Outcome::High => 1,
        }
    }
}

/// Full n-step conversion. Out-of-range inputs saturate silently and are
/// counted in the ledger.
pub fn convert(v: f64, cfg: &AdcConfig, ledger: &mut CostLedger) -> i64 {
    let (lo, hi) = cfg.code_range();
    let raw = (v / cfg.full_scale_lsb).round();
    let code = if raw < lo as f64 {
        ledger.note_saturation();
        lo
    } else if raw > hi as f64 {
        ledger.note_saturation();
        hi
    } else {
        raw as i64
    };
    ledger
        .charge(EventKind::SarConvert)
        .expect("sar_convert is a known event");
    code
}

/// One-shot comparison against `target ± 0.5` code. The lower boundary is
/// tested first; inputs exactly on a boundary classify as `Equal`.
pub fn compare_to_target(
    v: f64,
    target: i64,
    cfg: &AdcConfig,
    ledger: &mut CostLedger,
) -> Result<CompareOutcome> {
    let (lo, hi) = cfg.code_range();
    if !(lo..=hi).contains(&target) {
        return Err(Error::TargetOutOfRange {
            code: target,
            lo,
            hi,
        });
    }
    let x = v / cfg.full_scale_lsb;
    let t = target as f64;
    let res = if x < t - 0.5 {
        CompareOutcome {
            outcome: Outcome::Low,
            comparisons_used: 1,
        }
    } else if x > t + 0.5 {
        CompareOutcome {
            outcome: Outcome::High,
            comparisons_used: 2,
        }
    } else {
        CompareOutcome {
            outcome: Outcome::Equal,
            comparisons_used: 2,
        }
    };
    ledger.charge(EventKind::Compare {
        comparisons: res.comparisons_used,
    })?;
    Ok(res)
}
