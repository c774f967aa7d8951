// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adc::AdcConfig;
use crate::channel::NoiseParams;
use crate::cost::CostParams;
use crate::device::DeviceParams;
use crate::error::{Error, Result};

/// Verify scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// One-hot reads, compare-only ADC.
    CwSc,
    /// One-hot reads, `M` full conversions per cell averaged.
    MultiRead(u32),
    /// Hadamard reads, full conversions, inverse-Hadamard decode.
    HdPv,
    /// Hadamard reads, compare-only ADC, ternary decode.
    Harp,
}

impl Scheme {
    /// Whether the scheme recovers deviation magnitudes (and can size pulse trains).
    pub fn knows_magnitude(self) -> bool {
        matches!(self, Scheme::MultiRead(_) | Scheme::HdPv)
    }

    pub fn uses_hadamard(self) -> bool {
        matches!(self, Scheme::HdPv | Scheme::Harp)
    }

    /// Read patterns issued per verify sweep of an `n`-cell column.
    pub fn reads_per_sweep(self, n: usize) -> usize {
        match self {
            Scheme::MultiRead(m) => m as usize * n,
            _ => n,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::CwSc => f.write_str("cwsc"),
            Scheme::MultiRead(m) => write!(f, "multiread{m}"),
            Scheme::HdPv => f.write_str("hdpv"),
            Scheme::Harp => f.write_str("harp"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        match lower.as_str() {
            "cwsc" => return Ok(Scheme::CwSc),
            "hdpv" => return Ok(Scheme::HdPv),
            "harp" => return Ok(Scheme::Harp),
            _ => {}
        }
        let digits = lower
            .strip_prefix("multiread")
            .or_else(|| lower.strip_prefix("mr"))
            .map(|d| d.trim_start_matches(['(', ':', '=']).trim_end_matches(')'));
        match digits.map(str::parse::<u32>) {
            Some(Ok(m)) if m >= 1 => Ok(Scheme::MultiRead(m)),
            _ => Err(Error::ConfigInconsistent(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WvConfig {
    pub scheme: Scheme,
    /// Cells per column (`N`).
    pub column_len: usize,
    /// Weight precision `B`. Cell precision lives in `device.bits_per_cell`.
    pub weight_bits: u32,
    /// Consecutive STOP verdicts required to freeze a cell (`K`).
    pub freeze_streak: u32,
    /// HARP threshold on the unnormalized ternary accumulation.
    pub tau_w: i32,
    pub decision_threshold_lsb: f64,
    pub max_fine_iters: u32,
    pub max_coarse_iters: u32,
    /// Cap on the pulse train a magnitude-aware scheme issues per iteration.
    pub max_pulses_per_iter: u32,
    pub noise: NoiseParams,
    pub adc: AdcConfig,
    pub device: DeviceParams,
    pub cost: CostParams,
    pub seed: u64,
}

impl Default for WvConfig {
    fn default() -> Self {
        Self::for_column_len(32)
    }
}

/// Smallest resolution whose signed range holds `n · max_level`.
pub(crate) fn adc_bits_for(n: usize, max_level: i64) -> u32 {
    let peak = n as i64 * max_level;
    let mut bits = 2;
    while (1i64 << (bits - 1)) <= peak {
        bits += 1;
    }
    bits
}

impl WvConfig {
    /// Defaults with ADC resolution and cost constants matched to `n` cells.
    pub fn for_column_len(n: usize) -> Self {
        let device = DeviceParams::default();
        let bits = adc_bits_for(n, device.max_level());
        WvConfig {
            scheme: Scheme::HdPv,
            column_len: n,
            weight_bits: 6,
            freeze_streak: 2,
            tau_w: 4,
            decision_threshold_lsb: 0.5,
            max_fine_iters: 50,
            max_coarse_iters: 10,
            max_pulses_per_iter: 8,
            noise: NoiseParams::default(),
            adc: AdcConfig::new(bits),
            device,
            cost: CostParams::for_resolution(bits),
            seed: 0,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Re-derive ADC resolution and cost constants after changing `column_len`
    /// or cell precision.
    pub fn retune_adc(mut self) -> Self {
        let bits = adc_bits_for(self.column_len, self.device.max_level());
        self.adc.resolution = bits;
        self.cost = CostParams::for_resolution(bits);
        self
    }

    pub fn cell_bits(&self) -> u32 {
        self.device.bits_per_cell
    }

    /// Slices per weight, `B / B_C`.
    pub fn slices(&self) -> usize {
        (self.weight_bits / self.cell_bits()) as usize
    }

    /// Largest representable `|code|`.
    pub fn max_code(&self) -> i64 {
        (1i64 << (self.weight_bits - 1)) - 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInconsistent(m));
        self.device.validate()?;
        self.noise.validate()?;
        self.adc.validate()?;
        self.cost.validate()?;
        if self.weight_bits < 2 || self.weight_bits > 32 {
            return bad(format!("weight_bits {} outside 2..=32", self.weight_bits));
        }
        if !self.weight_bits.is_multiple_of(self.cell_bits()) {
            return bad(format!(
                "weight_bits {} not a multiple of cell bits {}",
                self.weight_bits,
                self.cell_bits()
            ));
        }
        if self.column_len == 0 {
            return bad("column_len must be >= 1".into());
        }
        if self.scheme.uses_hadamard() && !self.column_len.is_power_of_two() {
            return bad(format!(
                "column_len {} must be a power of two for {}",
                self.column_len, self.scheme
            ));
        }
        if let Scheme::MultiRead(0) = self.scheme {
            return bad("MultiRead requires M >= 1".into());
        }
        if self.tau_w < 0 {
            return bad("tau_w must be >= 0".into());
        }
        if self.freeze_streak == 0 {
            return bad("freeze streak K must be >= 1".into());
        }
        if !(self.decision_threshold_lsb > 0.0) {
            return bad("decision threshold must be > 0".into());
        }
        if self.max_pulses_per_iter == 0 {
            return bad("max_pulses_per_iter must be >= 1".into());
        }
        let peak = self.column_len as i64 * self.device.max_level();
        let (lo, hi) = self.adc.code_range();
        if peak > hi || -peak < lo {
            return bad(format!(
                "{}-bit ADC cannot hold column sums up to {peak}",
                self.adc.resolution
            ));
        }
        Ok(())
    }
}
