// SPDX-License-Identifier: Apache-2.0

//! Verify sweeps. Each sweep reads one signed column through the scheme's
//! read basis and classifies every cell as SET, RESET or STOP relative to
//! its signed target. SET means the effective value `w⁺ − w⁻` must rise.

use serde::{Deserialize, Serialize};

use crate::adc::{compare_to_target, convert, AdcConfig, Outcome, SamplingRef};
use crate::channel::{observe, SweepContext};
use crate::cost::{CostLedger, DecodeClass, EventKind};
use crate::error::Result;
use crate::hadamard::HadamardMatrix;
use crate::rng::SimRng;

use super::config::{Scheme, WvConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Set,
    Reset,
    Stop,
}

pub fn decide(estimate_lsb: f64, target_lsb: f64, threshold: f64) -> Decision {
    let dev = estimate_lsb - target_lsb;
    if dev > threshold {
        Decision::Reset
    } else if dev < -threshold {
        Decision::Set
    } else {
        Decision::Stop
    }
}

fn from_outcome(o: Outcome) -> Decision {
    match o {
        Outcome::Low => Decision::Set,
        Outcome::Equal => Decision::Stop,
        Outcome::High => Decision::Reset,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub decisions: Vec<Decision>,
    /// Cell-domain estimates, LSB. Present for magnitude-aware schemes.
    pub estimates: Option<Vec<f64>>,
    /// Unnormalized ternary accumulations (HARP only).
    pub accumulations: Option<Vec<i32>>,
}

/// Scheme-specific verify logic for one column length.
#[derive(Debug, Clone)]
pub struct Verifier {
    scheme: Scheme,
    n: usize,
    hadamard: Option<HadamardMatrix>,
    adc: AdcConfig,
    sigma_uc: f64,
    tau_w: i32,
    one_hot: Vec<Vec<i8>>,
}

impl Verifier {
    pub fn new(cfg: &WvConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.column_len;
        let hadamard = if cfg.scheme.uses_hadamard() {
            Some(HadamardMatrix::new(n)?)
        } else {
            None
        };
        let one_hot = (0..n)
            .map(|i| (0..n).map(|j| i8::from(i == j)).collect())
            .collect();
        Ok(Verifier {
            scheme: cfg.scheme,
            n,
            hadamard,
            adc: cfg.adc.with_ref(SamplingRef::HalfVcm),
            sigma_uc: cfg.noise.sigma_uc(),
            tau_w: cfg.tau_w,
            one_hot,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn column_len(&self) -> usize {
        self.n
    }

    pub fn hadamard(&self) -> Option<&HadamardMatrix> {
        self.hadamard.as_ref()
    }

    /// Sampling reference for Hadamard row `row`. The all-ones row uses the
    /// ground-referenced unsigned range unless the column stores negative
    /// weights, whose sums can fall below zero.
    fn row_adc(&self, row: usize, signed_column: bool) -> AdcConfig {
        if row == 0 && !signed_column {
            self.adc.with_ref(SamplingRef::Ground)
        } else {
            self.adc
        }
    }

    /// One verify sweep. `threshold` applies to magnitude-aware schemes;
    /// compare-only schemes use the ADC's fixed ±0.5 code band.
    pub fn sweep(
        &self,
        levels: &[f64],
        targets: &[i64],
        ctx: &SweepContext,
        threshold: f64,
        ledger: &mut CostLedger,
        rng: &mut SimRng,
    ) -> Result<SweepOutcome> {
        debug_assert_eq!(levels.len(), self.n);
        debug_assert_eq!(targets.len(), self.n);
        match self.scheme {
            Scheme::CwSc => self.sweep_cwsc(levels, targets, ctx, ledger, rng),
            Scheme::MultiRead(m) => {
                self.sweep_multiread(levels, targets, m, ctx, threshold, ledger, rng)
            }
            Scheme::HdPv => self.sweep_hdpv(levels, targets, ctx, threshold, ledger, rng),
            Scheme::Harp => self.sweep_harp(levels, targets, ctx, ledger, rng),
        }
    }

    /// Sweep used during coarse staging. HARP stages with one-hot compares:
    /// from HRS every cell deviates at once and a ternary decode of that
    /// state only resolves the cells furthest from the column mean.
    pub fn staging_sweep(
        &self,
        levels: &[f64],
        targets: &[i64],
        ctx: &SweepContext,
        threshold: f64,
        ledger: &mut CostLedger,
        rng: &mut SimRng,
    ) -> Result<SweepOutcome> {
        match self.scheme {
            Scheme::Harp => self.sweep_cwsc(levels, targets, ctx, ledger, rng),
            _ => self.sweep(levels, targets, ctx, threshold, ledger, rng),
        }
    }

    fn sweep_cwsc(
        &self,
        levels: &[f64],
        targets: &[i64],
        ctx: &SweepContext,
        ledger: &mut CostLedger,
        rng: &mut SimRng,
    ) -> Result<SweepOutcome> {
        let mut decisions = Vec::with_capacity(self.n);
        for (pattern, &t) in self.one_hot.iter().zip(targets) {
            let v = observe(levels, pattern, ctx, self.sigma_uc, rng);
            let o = compare_to_target(v, t, &self.adc, ledger)?;
            decisions.push(from_outcome(o.outcome));
        }
        Ok(SweepOutcome {
            decisions,
            estimates: None,
            accumulations: None,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn sweep_multiread(
        &self,
        levels: &[f64],
        targets: &[i64],
        m: u32,
        ctx: &SweepContext,
        threshold: f64,
        ledger: &mut CostLedger,
        rng: &mut SimRng,
    ) -> Result<SweepOutcome> {
        let mut estimates = Vec::with_capacity(self.n);
        for pattern in &self.one_hot {
            let sum: i64 = (0..m)
                .map(|_| convert(observe(levels, pattern, ctx, self.sigma_uc, rng), &self.adc, ledger))
                .sum();
            estimates.push(sum as f64 / f64::from(m));
        }
        let decisions = estimates
            .iter()
            .zip(targets)
            .map(|(&e, &t)| decide(e, t as f64, threshold))
            .collect();
        Ok(SweepOutcome {
            decisions,
            estimates: Some(estimates),
            accumulations: None,
        })
    }

    fn sweep_hdpv(
        &self,
        levels: &[f64],
        targets: &[i64],
        ctx: &SweepContext,
        threshold: f64,
        ledger: &mut CostLedger,
        rng: &mut SimRng,
    ) -> Result<SweepOutcome> {
        let h = self.hadamard.as_ref().expect("hadamard scheme");
        let signed = targets.iter().any(|&t| t < 0);
        let codes: Vec<i64> = h
            .rows()
            .enumerate()
            .map(|(i, row)| {
                let v = observe(levels, row, ctx, self.sigma_uc, rng);
                convert(v, &self.row_adc(i, signed), ledger)
            })
            .collect();
        let estimates = h.decode_codes(&codes)?;
        ledger.charge(EventKind::IhDecode(DecodeClass::FullCode))?;
        let decisions = estimates
            .iter()
            .zip(targets)
            .map(|(&e, &t)| decide(e, t as f64, threshold))
            .collect();
        Ok(SweepOutcome {
            decisions,
            estimates: Some(estimates),
            accumulations: None,
        })
    }

    fn sweep_harp(
        &self,
        levels: &[f64],
        targets: &[i64],
        ctx: &SweepContext,
        ledger: &mut CostLedger,
        rng: &mut SimRng,
    ) -> Result<SweepOutcome> {
        let h = self.hadamard.as_ref().expect("hadamard scheme");
        let signed = targets.iter().any(|&t| t < 0);
        let y_target = h.encode_int(targets)?;
        let mut signs = Vec::with_capacity(self.n);
        for (i, row) in h.rows().enumerate() {
            let v = observe(levels, row, ctx, self.sigma_uc, rng);
            let o = compare_to_target(v, y_target[i], &self.row_adc(i, signed), ledger)?;
            signs.push(o.sign());
        }
        let acc = h.decode_ternary(&signs)?;
        ledger.charge(EventKind::IhDecode(DecodeClass::Ternary))?;
        let tau = self.tau_w;
        let decisions = acc
            .iter()
            .map(|&a| {
                if a > tau {
                    Decision::Reset
                } else if a < -tau {
                    Decision::Set
                } else {
                    Decision::Stop
                }
            })
            .collect();
        Ok(SweepOutcome {
            decisions,
            estimates: None,
            accumulations: Some(acc),
        })
    }
}
