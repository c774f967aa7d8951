// SPDX-License-Identifier: Apache-2.0

//! Exact-invariant checks run by `rram-wv selftest`.

use rand::Rng;

use crate::channel::{NoiseParams, SweepContext};
use crate::container::WeightContainer;
use crate::cost::{sweep_cost_ratio, CostLedger, CostParams};
use crate::hadamard::HadamardMatrix;
use crate::mapper::{recombine, slice_code};
use crate::rng::{purpose, SeedStream};
use crate::wv::{Scheme, Verifier, WvConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check { name, passed: true, detail },
        Err(detail) => Check { name, passed: false, detail },
    }
}

const ORDERS: [usize; 6] = [2, 4, 8, 16, 32, 64];

fn orthogonality() -> Result<String, String> {
    for n in ORDERS {
        let h = HadamardMatrix::new(n).map_err(|e| e.to_string())?;
        for i in 0..n {
            for j in 0..n {
                let dot: i64 = (0..n)
                    .map(|k| i64::from(h.get(k, i)) * i64::from(h.get(k, j)))
                    .sum();
                let want = if i == j { n as i64 } else { 0 };
                if dot != want {
                    return Err(format!("N={n}: (HᵀH)[{i}][{j}] = {dot}"));
                }
            }
        }
    }
    Ok("HᵀH = N·I for N = 2..64".into())
}

fn round_trip() -> Result<String, String> {
    let mut rng = SeedStream::root(1).child(purpose::TARGETS, 0).rng();
    for n in ORDERS {
        let h = HadamardMatrix::new(n).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let w: Vec<i64> = (0..n).map(|_| rng.random_range(-7..=7)).collect();
            let y = h.encode_int(&w).map_err(|e| e.to_string())?;
            let back = h.decode_codes(&y).map_err(|e| e.to_string())?;
            if back.iter().zip(&w).any(|(&b, &x)| b != x as f64) {
                return Err(format!("N={n}: decode(encode(w)) != w for {w:?}"));
            }
        }
    }
    Ok("decode∘encode = id on 100 vectors per N".into())
}

fn common_mode_decode() -> Result<String, String> {
    for n in ORDERS {
        let h = HadamardMatrix::new(n).map_err(|e| e.to_string())?;
        let mu = 1.75;
        let d = h.decode(&vec![mu; n]).map_err(|e| e.to_string())?;
        if d[0] != mu || d[1..].iter().any(|&x| x != 0.0) {
            return Err(format!("N={n}: decode(μ·1) = {d:?}"));
        }
    }
    Ok("decode(μ·1) = μ·e₁ exactly".into())
}

fn ternary_exhaustive() -> Result<String, String> {
    let h = HadamardMatrix::new(4).map_err(|e| e.to_string())?;
    for code in 0..81u32 {
        let mut c = code;
        let s: Vec<i8> = (0..4)
            .map(|_| {
                let v = (c % 3) as i8 - 1;
                c /= 3;
                v
            })
            .collect();
        let got = h.decode_ternary(&s).map_err(|e| e.to_string())?;
        for (j, &g) in got.iter().enumerate() {
            let want: i32 = (0..4).map(|i| i32::from(h.get(i, j)) * i32::from(s[i])).sum();
            if g != want {
                return Err(format!("s={s:?}: acc[{j}] = {g}, expected {want}"));
            }
        }
    }
    Ok("decode_ternary = Hᵀs on all 81 sign vectors".into())
}

fn cm_rejection() -> Result<String, String> {
    let n = 32;
    let mut noisy = WvConfig::for_column_len(n).with_scheme(Scheme::HdPv);
    noisy.noise = NoiseParams::new(0.7, 1.0);
    let mut clean = noisy;
    clean.noise = NoiseParams::noiseless();
    let vn = Verifier::new(&noisy).map_err(|e| e.to_string())?;
    let vc = Verifier::new(&clean).map_err(|e| e.to_string())?;
    let root = SeedStream::root(3);
    for sweep in 0..200u64 {
        let mut rng = root.child(purpose::READ, sweep).rng();
        let levels: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..=7))).collect();
        let targets: Vec<i64> = (0..n).map(|_| rng.random_range(0..=7)).collect();
        let mu = 0.7 * (rng.random::<f64>() * 2.0 - 1.0) * 3.0;
        let ctx = SweepContext { column: 0, mu_cm: mu };
        let quiet = SweepContext { column: 0, mu_cm: 0.0 };
        let mut ledger = CostLedger::new(CostParams::default(), 9);
        let a = vn
            .sweep(&levels, &targets, &ctx, 0.5, &mut ledger, &mut rng)
            .map_err(|e| e.to_string())?;
        let b = vc
            .sweep(&levels, &targets, &quiet, 0.5, &mut ledger, &mut rng)
            .map_err(|e| e.to_string())?;
        if a.decisions[1..] != b.decisions[1..] {
            return Err(format!("sweep {sweep}: cells 2..N changed under μ_cm = {mu}"));
        }
    }
    Ok("HD-PV decisions for cells 2..N unaffected by μ_cm over 200 sweeps".into())
}

fn container_round_trip() -> Result<String, String> {
    let values = vec![0.1, -0.0, 1e-300, -3.25, f64::MAX, 0.30000000000000004];
    let c = WeightContainer::new(vec![2, 3], values).map_err(|e| e.to_string())?;
    let back = WeightContainer::parse(&c.to_text().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let same = back
        .values
        .iter()
        .zip(&c.values)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    if !same || back.header != c.header {
        return Err("container round trip changed values".into());
    }
    Ok("weight container round trip is bit-exact".into())
}

fn slice_identity() -> Result<String, String> {
    for code in -31..=31i64 {
        let mag = slice_code(code.abs(), 6, 3).map_err(|e| e.to_string())?;
        let back = code.signum() * recombine(&mag, 3);
        if back != code {
            return Err(format!("code {code} recombined to {back}"));
        }
    }
    Ok("slice/recombine identity for all 6-bit codes".into())
}

fn sweep_ratio() -> Result<String, String> {
    let (lat, _) = sweep_cost_ratio(Scheme::MultiRead(5), Scheme::HdPv, 32, &CostParams::default());
    if (lat - 4.99).abs() > 0.01 {
        return Err(format!("MultiRead(5)/HD-PV sweep latency ratio {lat}"));
    }
    Ok(format!("MultiRead(5)/HD-PV sweep latency ratio {lat:.4}"))
}

pub fn run_selftest() -> Vec<Check> {
    vec![
        check("hadamard_orthogonality", orthogonality()),
        check("encode_decode_round_trip", round_trip()),
        check("common_mode_decode", common_mode_decode()),
        check("ternary_decode_exhaustive", ternary_exhaustive()),
        check("common_mode_rejection", cm_rejection()),
        check("container_round_trip", container_round_trip()),
        check("slice_recombine_identity", slice_identity()),
        check("sweep_cost_ratio", sweep_ratio()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for c in run_selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
