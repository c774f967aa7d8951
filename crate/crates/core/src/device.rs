// SPDX-License-Identifier: Apache-2.0

//! Behavioral multi-level RRAM cell array.
//!
//! Each pulse moves a cell by a nominal step scaled by a static per-cell
//! device-to-device gain, a fresh cycle-to-cycle factor and a saturating
//! shape term that shrinks SET steps near `g_max` and RESET steps near
//! `g_min`. A Gaussian mapping perturbation is added once per write phase.
//! Conductances are clipped to `[g_min, g_max]` after every update.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{purpose, SeedStream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// HRS conductance, µS.
    pub g_min: f64,
    /// LRS conductance, µS.
    pub g_max: f64,
    pub bits_per_cell: u32,
    /// Nominal fine-pulse step as a fraction of one conductance LSB.
    pub fine_step_lsb: f64,
    /// Fine steps moved by one coarse pulse.
    pub coarse_steps_per_pulse: u32,
    /// Mapping noise std as a fraction of `g_max`, applied once per write phase.
    pub sigma_map_rel: f64,
    /// Std of the static per-cell step gain.
    pub d2d_sigma_rel: f64,
    /// Std of the per-pulse step factor.
    pub c2c_sigma_rel: f64,
    /// Saturation coefficient of the pulse response; 0 gives a linear device.
    pub nonlinearity: f64,
    // Pulse metadata. Carried for reporting only.
    pub fine_pulse_v: f64,
    pub coarse_pulse_v: f64,
    pub pulse_width_ns: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            g_min: 0.0,
            g_max: 13.0,
            bits_per_cell: 3,
            fine_step_lsb: 0.25,
            coarse_steps_per_pulse: 5,
            sigma_map_rel: 0.10,
            // Placeholders: the variation magnitudes are not published.
            d2d_sigma_rel: 0.1,
            c2c_sigma_rel: 0.3,
            nonlinearity: 1.0,
            fine_pulse_v: 2.0,
            coarse_pulse_v: 4.0,
            pulse_width_ns: 100.0,
        }
    }
}

impl DeviceParams {
    /// Noise-free linear device, convenient for deterministic checks.
    pub fn ideal() -> Self {
        DeviceParams {
            sigma_map_rel: 0.0,
            d2d_sigma_rel: 0.0,
            c2c_sigma_rel: 0.0,
            nonlinearity: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInconsistent(m.to_string()));
        if !(self.g_min >= 0.0 && self.g_min < self.g_max && self.g_max.is_finite()) {
            return bad("require 0 <= g_min < g_max");
        }
        if self.bits_per_cell == 0 || self.bits_per_cell > 8 {
            return bad("bits_per_cell must be in 1..=8");
        }
        if !(self.fine_step_lsb > 0.0) || self.coarse_steps_per_pulse == 0 {
            return bad("pulse steps must be positive");
        }
        if [
            self.sigma_map_rel,
            self.d2d_sigma_rel,
            self.c2c_sigma_rel,
            self.nonlinearity,
        ]
        .iter()
        .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return bad("noise and nonlinearity parameters must be finite and >= 0");
        }
        Ok(())
    }

    pub fn max_level(&self) -> i64 {
        (1i64 << self.bits_per_cell) - 1
    }

    /// One conductance LSB, µS.
    pub fn g_lsb(&self) -> f64 {
        (self.g_max - self.g_min) / self.max_level() as f64
    }

    pub fn level_to_conductance(&self, level: i64) -> Result<f64> {
        let max = self.max_level();
        if !(0..=max).contains(&level) {
            return Err(Error::LevelOutOfRange { level, max });
        }
        Ok(self.g_min + level as f64 * self.g_lsb())
    }

    /// Level of a conductance, snapped to a 2⁻³⁰ grid so that float residue
    /// from µS arithmetic never lands an ideal cell beside an ADC rounding edge.
    pub fn conductance_to_lsb(&self, g: f64) -> f64 {
        const GRID: f64 = (1u64 << 30) as f64;
        ((g - self.g_min) / self.g_lsb() * GRID).round() / GRID
    }

    pub fn step(&self, mode: PulseMode) -> f64 {
        let fine = self.fine_step_lsb * self.g_lsb();
        match mode {
            PulseMode::Fine => fine,
            PulseMode::Coarse => fine * f64::from(self.coarse_steps_per_pulse),
        }
    }

    fn shape(&self, g: f64, dir: Direction) -> f64 {
        if self.nonlinearity == 0.0 {
            return 1.0;
        }
        let range = self.g_max - self.g_min;
        let x = match dir {
            Direction::Set => (g - self.g_min) / range,
            Direction::Reset => (self.g_max - g) / range,
        };
        (-self.nonlinearity * x).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Set,
    Reset,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Set => 1.0,
            Direction::Reset => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseMode {
    Coarse,
    Fine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PulseTarget {
    pub row: usize,
    pub col: usize,
    pub direction: Direction,
    pub pulses: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulseTally {
    pub set: u32,
    pub reset: u32,
}

impl PulseTally {
    pub fn total(&self) -> u32 {
        self.set + self.reset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellArray {
    rows: usize,
    cols: usize,
    params: DeviceParams,
    conductance: Vec<f64>,
    d2d_gain: Vec<f64>,
    pulse_count: Vec<PulseTally>,
}

impl CellArray {
    /// All cells start at HRS. Device gains are drawn from `seed`.
    pub fn new(rows: usize, cols: usize, params: DeviceParams, seed: u64) -> Result<Self> {
        Self::from_stream(rows, cols, params, SeedStream::root(seed))
    }

    pub fn from_stream(
        rows: usize,
        cols: usize,
        params: DeviceParams,
        stream: SeedStream,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimensions { rows, cols });
        }
        params.validate()?;
        let n = rows * cols;
        let mut rng = stream.child(purpose::DEVICE, 0).rng();
        let d2d_gain = (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                (1.0 + params.d2d_sigma_rel * z).max(0.1)
            })
            .collect();
        Ok(CellArray {
            rows,
            cols,
            params,
            conductance: vec![params.g_min; n],
            d2d_gain,
            pulse_count: vec![PulseTally::default(); n],
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn params(&self) -> &DeviceParams {
        &self.params
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> Result<usize> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::IndexOutOfRange {
                row,
                col,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(row * self.cols + col)
    }

    #[inline]
    pub fn conductance(&self, row: usize, col: usize) -> f64 {
        self.conductance[row * self.cols + col]
    }

    /// Conductance of a cell in LSB units above `g_min`.
    #[inline]
    pub fn level(&self, row: usize, col: usize) -> f64 {
        self.params.conductance_to_lsb(self.conductance(row, col))
    }

    pub fn d2d_gain(&self, row: usize, col: usize) -> f64 {
        self.d2d_gain[row * self.cols + col]
    }

    pub fn pulse_count(&self, row: usize, col: usize) -> PulseTally {
        self.pulse_count[row * self.cols + col]
    }

    pub fn conductances(&self) -> &[f64] {
        &self.conductance
    }

    /// Direct write bypassing the pulse model (ideal programming). Clipped.
    pub fn set_conductance(&mut self, row: usize, col: usize, g: f64) -> Result<()> {
        let i = self.idx(row, col)?;
        self.conductance[i] = g.clamp(self.params.g_min, self.params.g_max);
        Ok(())
    }

    /// Apply one write phase. Inputs are validated before any cell changes.
    pub fn apply_pulses(
        &mut self,
        targets: &[PulseTarget],
        mode: PulseMode,
        rng: &mut SimRng,
    ) -> Result<()> {
        for t in targets {
            self.idx(t.row, t.col)?;
            if t.pulses == 0 {
                return Err(Error::ZeroPulseCount);
            }
            if mode == PulseMode::Coarse && t.direction == Direction::Reset {
                return Err(Error::CoarseResetForbidden);
            }
        }
        let p = self.params;
        let step = p.step(mode);
        let sigma_map = p.sigma_map_rel * p.g_max;
        for t in targets {
            let i = t.row * self.cols + t.col;
            let gain = self.d2d_gain[i];
            let mut g = self.conductance[i];
            for _ in 0..t.pulses {
                let c2c = if p.c2c_sigma_rel > 0.0 {
                    1.0 + p.c2c_sigma_rel * rng.sample::<f64, _>(StandardNormal)
                } else {
                    1.0
                };
                let dg = t.direction.sign() * step * gain * c2c * p.shape(g, t.direction);
                g = (g + dg).clamp(p.g_min, p.g_max);
            }
            if sigma_map > 0.0 {
                g += sigma_map * rng.sample::<f64, _>(StandardNormal);
                g = g.clamp(p.g_min, p.g_max);
            }
            self.conductance[i] = g;
            let tally = &mut self.pulse_count[i];
            match t.direction {
                Direction::Set => tally.set += t.pulses,
                Direction::Reset => tally.reset += t.pulses,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> SimRng {
        SeedStream::root(99).rng()
    }

    #[test]
    fn starts_at_hrs() {
        let a = CellArray::new(32, 64, DeviceParams::default(), 1).unwrap();
        assert!(a.conductances().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn gains_are_seeded() {
        let a = CellArray::new(8, 8, DeviceParams::default(), 5).unwrap();
        let b = CellArray::new(8, 8, DeviceParams::default(), 5).unwrap();
        let c = CellArray::new(8, 8, DeviceParams::default(), 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_empty_array() {
        assert!(matches!(
            CellArray::new(0, 4, DeviceParams::default(), 0),
            Err(Error::InvalidDimensions { .. })
        ));
    }

    #[test]
    fn four_fine_pulses_make_one_lsb() {
        let p = DeviceParams::ideal();
        let mut a = CellArray::new(1, 1, p, 0).unwrap();
        let t = PulseTarget {
            row: 0,
            col: 0,
            direction: Direction::Set,
            pulses: 4,
        };
        a.apply_pulses(&[t], PulseMode::Fine, &mut rng()).unwrap();
        assert!((a.level(0, 0) - 1.0).abs() < 1e-12);
        assert_eq!(a.pulse_count(0, 0), PulseTally { set: 4, reset: 0 });
    }

    #[test]
    fn reset_at_hrs_clips() {
        let mut a = CellArray::new(1, 1, DeviceParams::default(), 0).unwrap();
        let t = PulseTarget {
            row: 0,
            col: 0,
            direction: Direction::Reset,
            pulses: 3,
        };
        let p = DeviceParams {
            sigma_map_rel: 0.0,
            ..DeviceParams::default()
        };
        a.params = p;
        a.apply_pulses(&[t], PulseMode::Fine, &mut rng()).unwrap();
        assert_eq!(a.conductance(0, 0), 0.0);
    }

    #[test]
    fn coarse_reset_is_rejected_without_side_effects() {
        let mut a = CellArray::new(2, 1, DeviceParams::ideal(), 0).unwrap();
        let ts = [
            PulseTarget {
                row: 0,
                col: 0,
                direction: Direction::Set,
                pulses: 1,
            },
            PulseTarget {
                row: 1,
                col: 0,
                direction: Direction::Reset,
                pulses: 1,
            },
        ];
        assert_eq!(
            a.apply_pulses(&ts, PulseMode::Coarse, &mut rng()),
            Err(Error::CoarseResetForbidden)
        );
        assert_eq!(a.conductance(0, 0), 0.0);
        let oob = PulseTarget {
            row: 5,
            col: 0,
            direction: Direction::Set,
            pulses: 1,
        };
        assert!(matches!(
            a.apply_pulses(&[oob], PulseMode::Fine, &mut rng()),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn coarse_pulse_is_five_fine_steps() {
        let p = DeviceParams::ideal();
        let mut a = CellArray::new(1, 1, p, 0).unwrap();
        let t = PulseTarget {
            row: 0,
            col: 0,
            direction: Direction::Set,
            pulses: 2,
        };
        a.apply_pulses(&[t], PulseMode::Coarse, &mut rng()).unwrap();
        assert!((a.level(0, 0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn levels() {
        let p = DeviceParams::default();
        assert_eq!(p.level_to_conductance(0).unwrap(), 0.0);
        assert!((p.level_to_conductance(7).unwrap() - 13.0).abs() < 1e-12);
        assert!((p.level_to_conductance(3).unwrap() - 39.0 / 7.0).abs() < 1e-12);
        assert!(matches!(
            p.level_to_conductance(8),
            Err(Error::LevelOutOfRange { level: 8, max: 7 })
        ));
        assert!(p.level_to_conductance(-1).is_err());
    }
}
