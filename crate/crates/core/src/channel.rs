// SPDX-License-Identifier: Apache-2.0

//! Noisy analog column observations.
//!
//! A read with pattern `a` returns `aᵀ w + n_uc + μ_cm` in LSB units, where
//! `n_uc` is fresh for every read and `μ_cm` is shared by every read of one
//! verification sweep of one column.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::device::CellArray;
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CommonModeMode {
    /// Redraw the offset at the start of every verify sweep.
    #[default]
    PerSweep,
    /// Draw once per column and keep it for every sweep.
    PerColumn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Total read-noise std, LSB.
    pub sigma_total_lsb: f64,
    /// Common-mode share of the read-noise power.
    pub rho: f64,
    pub cm_mode: CommonModeMode,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            sigma_total_lsb: 0.7,
            rho: 0.0,
            cm_mode: CommonModeMode::PerSweep,
        }
    }
}

impl NoiseParams {
    pub fn new(sigma_total_lsb: f64, rho: f64) -> Self {
        NoiseParams {
            sigma_total_lsb,
            rho,
            cm_mode: CommonModeMode::PerSweep,
        }
    }

    pub fn noiseless() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_total_lsb >= 0.0 && self.sigma_total_lsb.is_finite()) {
            return Err(Error::ConfigInconsistent("read noise must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::ConfigInconsistent("rho must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn sigma_cm(&self) -> f64 {
        self.sigma_total_lsb * self.rho.sqrt()
    }

    pub fn sigma_uc(&self) -> f64 {
        self.sigma_total_lsb * (1.0 - self.rho).sqrt()
    }
}

/// A positive bitline column and, for signed weights, its negative partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnPair {
    pub pos: usize,
    pub neg: Option<usize>,
}

impl ColumnPair {
    pub fn single(col: usize) -> Self {
        ColumnPair { pos: col, neg: None }
    }

    pub fn signed(pos: usize, neg: usize) -> Self {
        ColumnPair {
            pos,
            neg: Some(neg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepContext {
    pub column: usize,
    /// Common-mode offset shared by all reads of this sweep, LSB.
    pub mu_cm: f64,
}

pub fn begin_sweep(column: usize, noise: &NoiseParams, rng: &mut SimRng) -> SweepContext {
    let s = noise.sigma_cm();
    let mu_cm = if s > 0.0 {
        s * rng.sample::<f64, _>(StandardNormal)
    } else {
        0.0
    };
    SweepContext { column, mu_cm }
}

/// Effective per-row value `w⁺ − w⁻` of a column pair, LSB.
pub fn signed_levels(array: &CellArray, pair: ColumnPair) -> Vec<f64> {
    (0..array.rows())
        .map(|r| {
            let pos = array.level(r, pair.pos);
            match pair.neg {
                Some(n) => pos - array.level(r, n),
                None => pos,
            }
        })
        .collect()
}

/// One read of precomputed cell values. `levels` and `pattern` must agree in length.
#[inline]
pub fn observe(
    levels: &[f64],
    pattern: &[i8],
    ctx: &SweepContext,
    sigma_uc: f64,
    rng: &mut SimRng,
) -> f64 {
    let clean: f64 = pattern
        .iter()
        .zip(levels)
        .map(|(&a, &w)| f64::from(a) * w)
        .sum();
    let n_uc = if sigma_uc > 0.0 {
        sigma_uc * rng.sample::<f64, _>(StandardNormal)
    } else {
        0.0
    };
    clean + n_uc + ctx.mu_cm
}

pub fn read_pattern(
    array: &CellArray,
    pair: ColumnPair,
    pattern: &[i8],
    ctx: &SweepContext,
    noise: &NoiseParams,
    rng: &mut SimRng,
) -> Result<f64> {
    if pattern.len() != array.rows() {
        return Err(Error::DimensionMismatch {
            expected: array.rows(),
            got: pattern.len(),
        });
    }
    let levels = signed_levels(array, pair);
    Ok(observe(&levels, pattern, ctx, noise.sigma_uc(), rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceParams;
    use crate::rng::SeedStream;

    fn array_with(levels: &[f64]) -> CellArray {
        let p = DeviceParams::ideal();
        let mut a = CellArray::new(levels.len(), 2, p, 0).unwrap();
        for (r, &l) in levels.iter().enumerate() {
            a.set_conductance(r, 0, p.g_min + l * p.g_lsb()).unwrap();
        }
        a
    }

    #[test]
    fn component_split_is_exact() {
        for &rho in &[0.0, 0.1, 0.25, 0.5, 1.0] {
            let n = NoiseParams::new(0.7, rho);
            let total = n.sigma_uc().powi(2) + n.sigma_cm().powi(2);
            assert!((total - 0.49).abs() < 1e-15);
        }
    }

    #[test]
    fn rho_zero_has_no_offset() {
        let mut rng = SeedStream::root(3).rng();
        let n = NoiseParams::new(0.7, 0.0);
        for c in 0..100 {
            assert_eq!(begin_sweep(c, &n, &mut rng).mu_cm, 0.0);
        }
    }

    #[test]
    fn noiseless_reads() {
        let a = array_with(&[5.0, 0.0, 0.0, 0.0]);
        let ctx = SweepContext { column: 0, mu_cm: 0.0 };
        let n = NoiseParams::noiseless();
        let mut rng = SeedStream::root(0).rng();
        let v = read_pattern(&a, ColumnPair::single(0), &[1, 0, 0, 0], &ctx, &n, &mut rng).unwrap();
        assert!((v - 5.0).abs() < 1e-12);

        let a = array_with(&[1.0, 2.0, 3.0, 4.0]);
        let v = read_pattern(&a, ColumnPair::single(0), &[1, 1, 1, 1], &ctx, &n, &mut rng).unwrap();
        assert!((v - 10.0).abs() < 1e-12);
        assert!(read_pattern(&a, ColumnPair::single(0), &[1, 1], &ctx, &n, &mut rng).is_err());
    }

    #[test]
    fn signed_pair_reads_difference() {
        let p = DeviceParams::ideal();
        let mut a = CellArray::new(2, 2, p, 0).unwrap();
        a.set_conductance(0, 0, 3.0 * p.g_lsb()).unwrap();
        a.set_conductance(1, 1, 2.0 * p.g_lsb()).unwrap();
        let lv = signed_levels(&a, ColumnPair::signed(0, 1));
        assert!((lv[0] - 3.0).abs() < 1e-12 && (lv[1] + 2.0).abs() < 1e-12);
    }
}
