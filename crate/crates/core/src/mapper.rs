// SPDX-License-Identifier: Apache-2.0

//! Weight quantization, bit-slicing and column tiling.
//!
//! A signed `B`-bit code is stored as `k = B / B_C` unsigned slices on a
//! positive/negative column pair; the side opposite the sign stays at HRS.
//! Weights fill `N`-row column groups in row-major order and the last group
//! is padded with zeros.

use serde::Serialize;

use crate::device::CellArray;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::rng::{purpose, SeedStream};
use crate::wv::{Verifier, WvConfig, WvResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub codes: Vec<i64>,
    /// Real weight per integer code.
    pub scale: f64,
    /// Set when the tensor had no nonzero entry; `scale` is then 1.
    pub all_zero: bool,
}

impl Quantized {
    pub fn dequantize(&self) -> Vec<f64> {
        self.codes.iter().map(|&c| c as f64 * self.scale).collect()
    }
}

/// Symmetric per-tensor quantization, round half away from zero.
pub fn quantize(weights: &[f64], bits: u32) -> Result<Quantized> {
    if !(2..=32).contains(&bits) {
        return Err(Error::ConfigInconsistent(format!("weight bits {bits} outside 2..=32")));
    }
    if weights.is_empty() {
        return Err(Error::ConfigInconsistent("empty weight tensor".into()));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::ConfigInconsistent("non-finite weight".into()));
    }
    let qmax = (1i64 << (bits - 1)) - 1;
    let peak = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if peak == 0.0 {
        return Ok(Quantized {
            codes: vec![0; weights.len()],
            scale: 1.0,
            all_zero: true,
        });
    }
    let scale = peak / qmax as f64;
    let codes = weights
        .iter()
        .map(|&w| ((w / scale).round() as i64).clamp(-qmax, qmax))
        .collect();
    Ok(Quantized {
        codes,
        scale,
        all_zero: false,
    })
}

/// Base-`2^B_C` digits of `|code|`, least significant first.
pub fn slice_code(code: i64, bits: u32, cell_bits: u32) -> Result<Vec<u32>> {
    if cell_bits == 0 || !bits.is_multiple_of(cell_bits) {
        return Err(Error::ConfigInconsistent(format!(
            "weight bits {bits} not a multiple of cell bits {cell_bits}"
        )));
    }
    let qmax = (1i64 << (bits - 1)) - 1;
    if code.abs() > qmax {
        return Err(Error::CodeOutOfRange { code, bits });
    }
    let k = bits / cell_bits;
    let mask = (1u64 << cell_bits) - 1;
    let mut mag = code.unsigned_abs();
    Ok((0..k)
        .map(|_| {
            let d = (mag & mask) as u32;
            mag >>= cell_bits;
            d
        })
        .collect())
}

pub fn recombine(slices: &[u32], cell_bits: u32) -> i64 {
    slices
        .iter()
        .enumerate()
        .map(|(l, &s)| i64::from(s) << (l as u32 * cell_bits))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellAssignment {
    /// Column group (one array per group).
    pub array: usize,
    pub row: usize,
}

impl CellAssignment {
    /// `(positive, negative)` column of slice `l`.
    pub fn columns(&self, slice: usize) -> (usize, usize) {
        (2 * slice, 2 * slice + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappedTensor {
    pub shape: Vec<usize>,
    pub scale: f64,
    pub weight_bits: u32,
    pub cell_bits: u32,
    pub column_len: usize,
    pub codes: Vec<i64>,
}

impl MappedTensor {
    pub fn new(shape: Vec<usize>, q: &Quantized, cfg: &WvConfig) -> Result<Self> {
        let count: usize = shape.iter().product();
        if count != q.codes.len() {
            return Err(Error::ConfigInconsistent(format!(
                "shape {shape:?} holds {count} values, got {}",
                q.codes.len()
            )));
        }
        Ok(MappedTensor {
            shape,
            scale: q.scale,
            weight_bits: cfg.weight_bits,
            cell_bits: cfg.cell_bits(),
            column_len: cfg.column_len,
            codes: q.codes.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn slices(&self) -> usize {
        (self.weight_bits / self.cell_bits) as usize
    }

    pub fn groups(&self) -> usize {
        self.codes.len().div_ceil(self.column_len)
    }

    pub fn assignment(&self, index: usize) -> CellAssignment {
        CellAssignment {
            array: index / self.column_len,
            row: index % self.column_len,
        }
    }

    /// Inverse of [`assignment`](Self::assignment); `None` for padding rows.
    pub fn index_of(&self, a: CellAssignment) -> Option<usize> {
        let i = a.array * self.column_len + a.row;
        (a.row < self.column_len && i < self.codes.len()).then_some(i)
    }

    /// Codes of group `g`, zero-padded to the column length.
    pub fn group_codes(&self, g: usize) -> Vec<i64> {
        let start = g * self.column_len;
        (0..self.column_len)
            .map(|r| self.codes.get(start + r).copied().unwrap_or(0))
            .collect()
    }

    /// Arrays with every cell placed exactly on its target level.
    pub fn ideal_arrays(&self, cfg: &WvConfig) -> Result<Vec<CellArray>> {
        (0..self.groups())
            .map(|g| {
                let mut a = CellArray::new(self.column_len, 2 * self.slices(), cfg.device, 0)?;
                for (row, code) in self.group_codes(g).into_iter().enumerate() {
                    let slices = slice_code(code, self.weight_bits, self.cell_bits)?;
                    for (l, &s) in slices.iter().enumerate() {
                        let (pos, neg) = (2 * l, 2 * l + 1);
                        let g_target = cfg.device.level_to_conductance(i64::from(s))?;
                        a.set_conductance(row, if code < 0 { neg } else { pos }, g_target)?;
                    }
                }
                Ok(a)
            })
            .collect()
    }
}

/// Effective real weights `Σ_l 2^{l·B_C} (level⁺ − level⁻) · scale`, unrounded.
pub fn readback_effective(arrays: &[CellArray], mapping: &MappedTensor) -> Vec<f64> {
    (0..mapping.len())
        .map(|i| {
            let a = mapping.assignment(i);
            let arr = &arrays[a.array];
            (0..mapping.slices())
                .map(|l| {
                    let (pos, neg) = a.columns(l);
                    let w = arr.level(a.row, pos) - arr.level(a.row, neg);
                    w * (1u64 << (l as u32 * mapping.cell_bits)) as f64
                })
                .sum::<f64>()
                * mapping.scale
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ProgrammedTensor {
    pub mapping: MappedTensor,
    /// One result per column group, in group order.
    pub groups: Vec<WvResult>,
    pub all_zero: bool,
}

impl ProgrammedTensor {
    pub fn arrays(&self) -> Vec<CellArray> {
        self.groups.iter().map(|r| r.array.clone()).collect()
    }

    pub fn readback(&self) -> Vec<f64> {
        readback_effective(&self.arrays(), &self.mapping)
    }

    /// Weight-level RMS over real (non-padding) weights, in code LSB.
    pub fn rms_weight_lsb(&self) -> f64 {
        let n = self.mapping.len();
        let s: f64 = (0..n)
            .map(|i| {
                let a = self.mapping.assignment(i);
                self.groups[a.array].per_weight_error_lsb[a.row].powi(2)
            })
            .sum();
        (s / n as f64).sqrt()
    }
}

/// Quantize, map and program a weight tensor. Column groups run with
/// independent streams derived from `cfg.seed`.
pub fn program_tensor(
    weights: &[f64],
    shape: Vec<usize>,
    cfg: &WvConfig,
    exec: Execution,
) -> Result<ProgrammedTensor> {
    cfg.validate()?;
    let q = quantize(weights, cfg.weight_bits)?;
    let mapping = MappedTensor::new(shape, &q, cfg)?;
    let verifier = Verifier::new(cfg)?;
    let root = SeedStream::root(cfg.seed);
    let groups = map_indexed(mapping.groups(), exec, |g| {
        crate::wv::engine_run(
            &mapping.group_codes(g),
            cfg,
            &verifier,
            root.child(purpose::COLUMN, g as u64),
        )
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ProgrammedTensor {
        mapping,
        groups,
        all_zero: q.all_zero,
    })
}
