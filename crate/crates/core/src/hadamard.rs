// SPDX-License-Identifier: Apache-2.0

//! Hadamard read bases and the encode/decode transforms used by the
//! Hadamard-domain verify schemes.
//!
//! Matrices are built with the Sylvester recursion, so entry `(i, j)` is
//! `(-1)^popcount(i & j)`. Row 0 is all ones and every other row is balanced.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    /// Row-major `order * order` entries in {-1, +1}.
    entries: Vec<i8>,
}

impl HadamardMatrix {
    pub fn new(order: usize) -> Result<Self> {
        if !order.is_power_of_two() {
            return Err(Error::NonPowerOfTwo(order));
        }
        if !(2..=MAX_ORDER).contains(&order) {
            return Err(Error::OrderOutOfRange(order));
        }
        let mut entries = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                entries.push(if (i & j).count_ones() % 2 == 0 { 1 } else { -1 });
            }
        }
        Ok(HadamardMatrix { order, entries })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        self.entries.chunks_exact(self.order)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got,
            });
        }
        Ok(())
    }

    /// Noiseless Hadamard-domain image `H w`.
    pub fn encode(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w.len())?;
        Ok(self
            .rows()
            .map(|r| r.iter().zip(w).map(|(&h, &x)| f64::from(h) * x).sum())
            .collect())
    }

    /// Exact integer `H w`, used to form Hadamard-domain targets.
    pub fn encode_int(&self, w: &[i64]) -> Result<Vec<i64>> {
        self.check_len(w.len())?;
        Ok(self
            .rows()
            .map(|r| r.iter().zip(w).map(|(&h, &x)| i64::from(h) * x).sum())
            .collect())
    }

    /// Inverse transform `(1/N) Hᵀ y`.
    pub fn decode(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        let n = self.order;
        let mut out = vec![0.0f64; n];
        for (i, row) in self.rows().enumerate() {
            let yi = y[i];
            for (o, &h) in out.iter_mut().zip(row) {
                *o += f64::from(h) * yi;
            }
        }
        let inv = 1.0 / n as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        Ok(out)
    }

    /// Decode of integer codes. Sums are exact; only the final division rounds.
    pub fn decode_codes(&self, codes: &[i64]) -> Result<Vec<f64>> {
        self.check_len(codes.len())?;
        let n = self.order;
        let mut acc = vec![0i64; n];
        for (i, row) in self.rows().enumerate() {
            let c = codes[i];
            for (a, &h) in acc.iter_mut().zip(row) {
                *a += i64::from(h) * c;
            }
        }
        Ok(acc.into_iter().map(|a| a as f64 / n as f64).collect())
    }

    /// Unnormalized `Hᵀ s` over ternary signs. Results lie in `[-N, N]`.
    pub fn decode_ternary(&self, signs: &[i8]) -> Result<Vec<i32>> {
        self.check_len(signs.len())?;
        if let Some(&bad) = signs.iter().find(|s| !(-1..=1).contains(*s)) {
            return Err(Error::InvalidTernaryEntry(i32::from(bad)));
        }
        let mut acc = vec![0i32; self.order];
        for (i, row) in self.rows().enumerate() {
            let s = i32::from(signs[i]);
            if s == 0 {
                continue;
            }
            for (a, &h) in acc.iter_mut().zip(row) {
                *a += i32::from(h) * s;
            }
        }
        Ok(acc)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.order, self.order, |i, j| f64::from(self.get(i, j)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    OneHot,
    Hadamard,
}

/// The `N` read patterns of one verify sweep. One-hot patterns hold {0, 1}
/// selections, Hadamard patterns hold {-1, +1} bitline drives.
#[derive(Debug, Clone)]
pub struct ReadBasis {
    kind: BasisKind,
    patterns: Vec<Vec<i8>>,
}

impl ReadBasis {
    pub fn one_hot(n: usize) -> Self {
        let patterns = (0..n)
            .map(|i| (0..n).map(|j| i8::from(i == j)).collect())
            .collect();
        ReadBasis {
            kind: BasisKind::OneHot,
            patterns,
        }
    }

    pub fn hadamard(h: &HadamardMatrix) -> Self {
        ReadBasis {
            kind: BasisKind::Hadamard,
            patterns: h.rows().map(<[i8]>::to_vec).collect(),
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, i: usize) -> &[i8] {
        &self.patterns[i]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.patterns.len();
        DMatrix::from_fn(n, n, |i, j| f64::from(self.patterns[i][j]))
    }
}

/// Per-cell variance of the least-squares estimate `x̂ = A⁻¹ y` under i.i.d.
/// measurement noise of standard deviation `sigma`: `diag(σ² (AᵀA)⁻¹)`.
pub fn estimator_variance(a: &DMatrix<f64>, sigma: f64) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let gram = a.transpose() * a;
    let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
    let chol = gram.clone().cholesky().ok_or(Error::SingularMatrix)?;
    if chol
        .l_dirty()
        .diagonal()
        .iter()
        .any(|&d| d * d < 1e-10 * scale)
    {
        return Err(Error::SingularMatrix);
    }
    let inv = chol.inverse();
    let s2 = sigma * sigma;
    Ok(inv.diagonal().iter().map(|v| s2 * v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_case() {
        let h = HadamardMatrix::new(2).unwrap();
        assert_eq!(h.row(0), &[1, 1]);
        assert_eq!(h.row(1), &[1, -1]);
    }

    #[test]
    fn row_sums_order_4() {
        let h = HadamardMatrix::new(4).unwrap();
        let sums: Vec<i32> = h.rows().map(|r| r.iter().map(|&x| i32::from(x)).sum()).collect();
        assert_eq!(sums, vec![4, 0, 0, 0]);
    }

    #[test]
    fn rejects_bad_orders() {
        assert_eq!(HadamardMatrix::new(12), Err(Error::NonPowerOfTwo(12)));
        assert_eq!(HadamardMatrix::new(1), Err(Error::OrderOutOfRange(1)));
        assert_eq!(HadamardMatrix::new(0), Err(Error::NonPowerOfTwo(0)));
        assert_eq!(HadamardMatrix::new(2048), Err(Error::OrderOutOfRange(2048)));
        assert!(HadamardMatrix::new(1024).is_ok());
    }

    #[test]
    fn encode_examples() {
        let h2 = HadamardMatrix::new(2).unwrap();
        assert_eq!(h2.encode(&[3.0, 5.0]).unwrap(), vec![8.0, -2.0]);
        let h4 = HadamardMatrix::new(4).unwrap();
        assert_eq!(h4.encode(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![10.0, -2.0, -4.0, 0.0]);
        assert_eq!(h4.encode(&[0.0; 4]).unwrap(), vec![0.0; 4]);
        assert!(matches!(
            h4.encode(&[1.0; 3]),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn decode_constant_hits_first_cell_only() {
        let h = HadamardMatrix::new(32).unwrap();
        let mu = 0.8125;
        let d = h.decode(&[mu; 32]).unwrap();
        assert_eq!(d[0], mu);
        assert!(d[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn ternary_examples() {
        let h = HadamardMatrix::new(4).unwrap();
        assert_eq!(h.decode_ternary(&[0; 4]).unwrap(), vec![0; 4]);
        assert_eq!(h.decode_ternary(&[1, 0, 0, 0]).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(h.decode_ternary(&[1, 2, 0, 0]), Err(Error::InvalidTernaryEntry(2)));
        assert!(h.decode_ternary(&[0; 3]).is_err());
    }

    #[test]
    fn variance_identity_and_hadamard() {
        let id = DMatrix::<f64>::identity(32, 32);
        let v = estimator_variance(&id, 1.0).unwrap();
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let h = HadamardMatrix::new(32).unwrap().to_matrix();
        let v = estimator_variance(&h, 1.0).unwrap();
        assert!(v.iter().all(|&x| (x - 1.0 / 32.0).abs() < 1e-12));
    }

    #[test]
    fn variance_rejects_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(estimator_variance(&a, 1.0), Err(Error::SingularMatrix));
    }

    #[test]
    fn one_hot_basis_is_identity() {
        let b = ReadBasis::one_hot(8);
        assert_eq!(b.len(), 8);
        assert_eq!(b.to_matrix(), DMatrix::<f64>::identity(8, 8));
    }
}
