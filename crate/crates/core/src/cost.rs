// SPDX-License-Identifier: Apache-2.0

//! Latency/energy accounting for write-and-verify.
//!
//! Costs are charged per hardware event and accumulated in integer
//! picoseconds and femtojoules, so totals are exactly additive and
//! independent of summation order.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wv::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub read_pulse_ns: f64,
    pub sar_latency_ns: f64,
    pub compare_latency_ns: f64,
    pub tia_energy_pj: f64,
    pub sar_energy_pj: f64,
    /// Energy of one comparator decision in compare-only mode.
    pub compare_energy_pj: f64,
    pub write_pulse_ns: f64,
    pub write_pulse_energy_pj: f64,
    pub ih_decode_latency_ns: f64,
    pub ih_decode_energy_hdpv_pj: f64,
    pub ih_decode_energy_harp_pj: f64,
}

impl CostParams {
    /// Defaults for an `bits`-bit column ADC.
    ///
    /// The published figures are ranges over 8..=10-bit converters. Latency,
    /// TIA energy and decode energy interpolate linearly in resolution; the
    /// capacitor-array energy interpolates geometrically. Resolutions outside
    /// 8..=10 take the nearest endpoint.
    pub fn for_resolution(bits: u32) -> Self {
        let t = ((f64::from(bits) - 8.0) / 2.0).clamp(0.0, 1.0);
        let lerp = |a: f64, b: f64| a + (b - a) * t;
        let sar_energy_pj = 1.8 * (32.0f64 / 1.8).powf(t);
        CostParams {
            read_pulse_ns: 32.0,
            sar_latency_ns: lerp(45.0, 50.0),
            compare_latency_ns: 30.0,
            tia_energy_pj: lerp(1.44, 2.7),
            sar_energy_pj,
            // Calibration, not a measured figure.
            compare_energy_pj: 0.2 * sar_energy_pj,
            write_pulse_ns: 100.0,
            write_pulse_energy_pj: 0.0,
            ih_decode_latency_ns: 5.0,
            ih_decode_energy_hdpv_pj: lerp(0.8, 1.0),
            ih_decode_energy_harp_pj: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.read_pulse_ns,
            self.sar_latency_ns,
            self.compare_latency_ns,
            self.tia_energy_pj,
            self.sar_energy_pj,
            self.compare_energy_pj,
            self.write_pulse_ns,
            self.write_pulse_energy_pj,
            self.ih_decode_latency_ns,
            self.ih_decode_energy_hdpv_pj,
            self.ih_decode_energy_harp_pj,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::ConfigInconsistent(
                "cost parameters must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

impl Default for CostParams {
    fn default() -> Self {
        Self::for_resolution(9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecodeClass {
    /// Multi-bit adder tree over full ADC codes.
    FullCode,
    /// Ternary sign accumulation.
    Ternary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    ReadPulse,
    SarConvert,
    Compare { comparisons: u8 },
    IhDecode(DecodeClass),
    WritePhase { max_pulses: u32 },
}

const SLOTS: usize = 7;
const SLOT_NAMES: [&str; SLOTS] = [
    "read_pulse",
    "sar_convert",
    "compare_1",
    "compare_2",
    "ih_decode_full",
    "ih_decode_ternary",
    "write_phase",
];

impl EventKind {
    fn slot(self) -> Result<usize> {
        Ok(match self {
            EventKind::ReadPulse => 0,
            EventKind::SarConvert => 1,
            EventKind::Compare { comparisons: 1 } => 2,
            EventKind::Compare { comparisons: 2 } => 3,
            EventKind::Compare { comparisons } => {
                return Err(Error::UnknownEventKind(format!("compare({comparisons})")))
            }
            EventKind::IhDecode(DecodeClass::FullCode) => 4,
            EventKind::IhDecode(DecodeClass::Ternary) => 5,
            EventKind::WritePhase { .. } => 6,
        })
    }

    pub fn is_adc(self) -> bool {
        matches!(self, EventKind::SarConvert | EventKind::Compare { .. })
    }

    /// `(ns, pJ)` of one event.
    pub fn cost(self, p: &CostParams) -> (f64, f64) {
        match self {
            EventKind::ReadPulse => (p.read_pulse_ns, 0.0),
            EventKind::SarConvert => (
                p.read_pulse_ns + p.sar_latency_ns,
                p.tia_energy_pj + p.sar_energy_pj,
            ),
            EventKind::Compare { comparisons } => (
                p.read_pulse_ns + p.compare_latency_ns,
                p.tia_energy_pj + f64::from(comparisons) * p.compare_energy_pj,
            ),
            EventKind::IhDecode(DecodeClass::FullCode) => {
                (p.ih_decode_latency_ns, p.ih_decode_energy_hdpv_pj)
            }
            EventKind::IhDecode(DecodeClass::Ternary) => {
                (p.ih_decode_latency_ns, p.ih_decode_energy_harp_pj)
            }
            EventKind::WritePhase { max_pulses } => {
                let n = f64::from(max_pulses);
                (n * p.write_pulse_ns, n * p.write_pulse_energy_pj)
            }
        }
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<u32> {
            a.and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::UnknownEventKind(s.to_string()))
        };
        Ok(match name {
            "read_pulse" => EventKind::ReadPulse,
            "sar_convert" => EventKind::SarConvert,
            "compare" => EventKind::Compare {
                comparisons: u8::try_from(num(arg)?)
                    .map_err(|_| Error::UnknownEventKind(s.to_string()))?,
            },
            "ih_decode" => match arg {
                Some("full") | Some("hdpv") => EventKind::IhDecode(DecodeClass::FullCode),
                Some("ternary") | Some("harp") => EventKind::IhDecode(DecodeClass::Ternary),
                _ => return Err(Error::UnknownEventKind(s.to_string())),
            },
            "write_phase" => EventKind::WritePhase {
                max_pulses: num(arg)?,
            },
            _ => return Err(Error::UnknownEventKind(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub events: u64,
    /// Comparator decisions for ADC events, pulses for write phases.
    pub units: u64,
    pub ps: u64,
    pub fj: u64,
}

#[inline]
fn to_ps(ns: f64) -> u64 {
    (ns * 1e3).round() as u64
}

#[inline]
fn to_fj(pj: f64) -> u64 {
    (pj * 1e3).round() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    params: CostParams,
    adc_bits: u32,
    tallies: [Tally; SLOTS],
    saturations: u64,
}

impl CostLedger {
    pub fn new(params: CostParams, adc_bits: u32) -> Self {
        CostLedger {
            params,
            adc_bits,
            tallies: [Tally::default(); SLOTS],
            saturations: 0,
        }
    }

    pub fn params(&self) -> &CostParams {
        &self.params
    }

    pub fn charge(&mut self, kind: EventKind) -> Result<()> {
        let slot = kind.slot()?;
        let (ns, pj) = kind.cost(&self.params);
        let units = match kind {
            EventKind::SarConvert => u64::from(self.adc_bits),
            EventKind::Compare { comparisons } => u64::from(comparisons),
            EventKind::WritePhase { max_pulses } => u64::from(max_pulses),
            _ => 0,
        };
        let t = &mut self.tallies[slot];
        t.events += 1;
        t.units += units;
        t.ps += to_ps(ns);
        t.fj += to_fj(pj);
        Ok(())
    }

    pub fn note_saturation(&mut self) {
        self.saturations += 1;
    }

    pub fn saturations(&self) -> u64 {
        self.saturations
    }

    /// Ledgers must share cost parameters to be merged.
    pub fn merge(&mut self, other: &CostLedger) {
        for (a, b) in self.tallies.iter_mut().zip(other.tallies.iter()) {
            a.events += b.events;
            a.units += b.units;
            a.ps += b.ps;
            a.fj += b.fj;
        }
        self.saturations += other.saturations;
    }

    pub fn tally(&self, name: &str) -> Option<Tally> {
        SLOT_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.tallies[i])
    }

    pub fn tallies(&self) -> impl Iterator<Item = (&'static str, Tally)> + '_ {
        SLOT_NAMES.iter().copied().zip(self.tallies.iter().copied())
    }

    pub fn total_ps(&self) -> u64 {
        self.tallies.iter().map(|t| t.ps).sum()
    }

    pub fn total_fj(&self) -> u64 {
        self.tallies.iter().map(|t| t.fj).sum()
    }

    pub fn total_ns(&self) -> f64 {
        self.total_ps() as f64 / 1e3
    }

    pub fn total_pj(&self) -> f64 {
        self.total_fj() as f64 / 1e3
    }

    fn adc_slots(&self) -> impl Iterator<Item = &Tally> {
        self.tallies[1..=3].iter()
    }

    /// Column read patterns issued (one per conversion or compare).
    pub fn read_patterns(&self) -> u64 {
        self.tallies[0].events + self.adc_slots().map(|t| t.events).sum::<u64>()
    }

    pub fn sar_converts(&self) -> u64 {
        self.tallies[1].events
    }

    pub fn compares(&self) -> u64 {
        self.tallies[2].events + self.tallies[3].events
    }

    pub fn comparisons(&self) -> u64 {
        self.adc_slots().map(|t| t.units).sum()
    }

    pub fn decodes(&self) -> u64 {
        self.tallies[4].events + self.tallies[5].events
    }

    pub fn write_pulses(&self) -> u64 {
        self.tallies[6].units
    }

    /// Share of energy spent in TIA + ADC events.
    pub fn adc_energy_share(&self) -> f64 {
        let total = self.total_fj();
        if total == 0 {
            return 0.0;
        }
        self.adc_slots().map(|t| t.fj).sum::<u64>() as f64 / total as f64
    }

    pub fn adc_latency_share(&self) -> f64 {
        let total = self.total_ps();
        if total == 0 {
            return 0.0;
        }
        let adc: u64 = self.adc_slots().map(|t| t.ps).sum();
        adc as f64 / total as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,events,units,ns,pj\n");
        for (name, t) in self.tallies() {
            let _ = writeln!(
                s,
                "{name},{},{},{},{}",
                t.events,
                t.units,
                t.ps as f64 / 1e3,
                t.fj as f64 / 1e3
            );
        }
        s
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let kinds: serde_json::Map<String, serde_json::Value> = self
            .tallies()
            .map(|(n, t)| (n.to_string(), serde_json::to_value(t).unwrap_or_default()))
            .collect();
        serde_json::json!({
            "total_ns": self.total_ns(),
            "total_pj": self.total_pj(),
            "read_patterns": self.read_patterns(),
            "adc_energy_share": self.adc_energy_share(),
            "adc_latency_share": self.adc_latency_share(),
            "saturations": self.saturations,
            "events": kinds,
        })
    }
}

/// Events of one verify sweep over an `n`-cell column. Compare events are
/// taken at their single-comparison minimum.
pub fn sweep_events(scheme: Scheme, n: usize) -> Vec<(EventKind, u64)> {
    let n = n as u64;
    match scheme {
        Scheme::CwSc => vec![(EventKind::Compare { comparisons: 1 }, n)],
        Scheme::MultiRead(m) => vec![(EventKind::SarConvert, u64::from(m) * n)],
        Scheme::HdPv => vec![
            (EventKind::SarConvert, n),
            (EventKind::IhDecode(DecodeClass::FullCode), 1),
        ],
        Scheme::Harp => vec![
            (EventKind::Compare { comparisons: 1 }, n),
            (EventKind::IhDecode(DecodeClass::Ternary), 1),
        ],
    }
}

pub fn sweep_ledger(scheme: Scheme, n: usize, params: &CostParams, adc_bits: u32) -> CostLedger {
    let mut ledger = CostLedger::new(*params, adc_bits);
    for (kind, count) in sweep_events(scheme, n) {
        for _ in 0..count {
            ledger.charge(kind).expect("sweep events are well formed");
        }
    }
    ledger
}

/// Per-sweep `(latency, energy)` ratio of scheme `a` over scheme `b`.
pub fn sweep_cost_ratio(a: Scheme, b: Scheme, n: usize, params: &CostParams) -> (f64, f64) {
    let la = sweep_ledger(a, n, params, 0);
    let lb = sweep_ledger(b, n, params, 0);
    (
        la.total_ps() as f64 / lb.total_ps() as f64,
        la.total_fj() as f64 / lb.total_fj() as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_bit_defaults() {
        let p = CostParams::for_resolution(9);
        assert_eq!(p.sar_latency_ns, 47.5);
        assert!((p.tia_energy_pj - 2.07).abs() < 1e-12);
        assert!((p.sar_energy_pj - (1.8f64 * 32.0).sqrt()).abs() < 1e-12);
        assert!((p.ih_decode_energy_hdpv_pj - 0.9).abs() < 1e-12);
    }

    #[test]
    fn single_events() {
        let p = CostParams::default();
        let mut l = CostLedger::new(p, 9);
        l.charge(EventKind::SarConvert).unwrap();
        assert_eq!(l.total_ps(), 79_500);
        let mut l = CostLedger::new(p, 9);
        l.charge(EventKind::Compare { comparisons: 1 }).unwrap();
        assert_eq!(l.total_ps(), 62_000);
        assert_eq!(l.comparisons(), 1);
        assert!(l.charge(EventKind::Compare { comparisons: 3 }).is_err());
    }

    #[test]
    fn hdpv_sweep_latency() {
        let l = sweep_ledger(Scheme::HdPv, 32, &CostParams::default(), 9);
        assert_eq!(l.total_ps(), 2_549_000);
        assert_eq!(l.read_patterns(), 32);
    }

    #[test]
    fn ratio_examples() {
        let p = CostParams::default();
        let (lat, _) = sweep_cost_ratio(Scheme::MultiRead(5), Scheme::HdPv, 32, &p);
        assert!((lat - 12720.0 / 2549.0).abs() < 1e-12);
        let (_, e) = sweep_cost_ratio(Scheme::Harp, Scheme::HdPv, 32, &p);
        assert!(e < 1.0);
    }

    #[test]
    fn parse_event_kinds() {
        assert_eq!("sar_convert".parse::<EventKind>().unwrap(), EventKind::SarConvert);
        assert_eq!(
            "compare:2".parse::<EventKind>().unwrap(),
            EventKind::Compare { comparisons: 2 }
        );
        assert_eq!(
            "write_phase:8".parse::<EventKind>().unwrap(),
            EventKind::WritePhase { max_pulses: 8 }
        );
        assert!(matches!(
            "bogus".parse::<EventKind>(),
            Err(Error::UnknownEventKind(_))
        ));
    }

    #[test]
    fn merge_adds_exactly() {
        let p = CostParams::default();
        let mut a = sweep_ledger(Scheme::Harp, 32, &p, 9);
        let b = sweep_ledger(Scheme::HdPv, 32, &p, 9);
        let (ta, tb) = (a.total_fj(), b.total_fj());
        a.merge(&b);
        assert_eq!(a.total_fj(), ta + tb);
    }
}
