// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use rram_wv::adc::{compare_to_target, convert};
use rram_wv::mapper::recombine;
use rram_wv::{
    quantize, slice_code, AdcConfig, CostLedger, CostParams, EventKind, Outcome, SamplingRef,
    WeightContainer,
};

#[test]
fn every_six_bit_code_slices_and_recombines() {
    for code in -31i64..=31 {
        let s = slice_code(code, 6, 3).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|&d| d < 8));
        assert_eq!(code.signum() * recombine(&s, 3), code);
        assert_eq!(code.abs(), i64::from(s[0]) + 8 * i64::from(s[1]));
    }
    assert!(slice_code(32, 6, 3).is_err());
    assert!(slice_code(1, 6, 4).is_err());
}

fn ledger() -> CostLedger {
    CostLedger::new(CostParams::for_resolution(9), 9)
}

fn event() -> impl Strategy<Value = EventKind> {
    prop_oneof![
        Just(EventKind::ReadPulse),
        Just(EventKind::SarConvert),
        (1u8..=2).prop_map(|comparisons| EventKind::Compare { comparisons }),
        (1u32..=8).prop_map(|max_pulses| EventKind::WritePhase { max_pulses }),
    ]
}

proptest! {
    #[test]
    fn quantize_round_trip(
        ws in prop::collection::vec(-10.0f64..10.0, 1..64),
        bits in 2u32..=12,
    ) {
        let q = quantize(&ws, bits).unwrap();
        let qmax = (1i64 << (bits - 1)) - 1;
        prop_assert!(q.codes.iter().all(|c| c.abs() <= qmax));
        for (w, d) in ws.iter().zip(q.dequantize()) {
            prop_assert!((w - d).abs() <= q.scale / 2.0 + 1e-12);
        }
        for &c in &q.codes {
            if bits % 2 == 0 {
                let s = slice_code(c, bits, 2).unwrap();
                prop_assert_eq!(c.signum() * recombine(&s, 2), c);
            }
        }
    }

    #[test]
    fn container_text_round_trip_is_bit_exact(
        rows in 1usize..6,
        cols in 1usize..6,
        seed in any::<u64>(),
    ) {
        let mut rng = rram_wv::SeedStream::root(seed).rng();
        let values: Vec<f64> = (0..rows * cols)
            .map(|_| rand::Rng::random_range(&mut rng, -1e3..1e3))
            .collect();
        let c = WeightContainer::new(vec![rows, cols], values).unwrap();
        let back = WeightContainer::parse(&c.to_text().unwrap()).unwrap();
        prop_assert_eq!(back.header, c.header.clone());
        for (a, b) in back.values.iter().zip(&c.values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn convert_is_monotone(a in -300.0f64..300.0, b in -300.0f64..300.0, bits in 4u32..=10) {
        let cfg = AdcConfig::new(bits);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut l = ledger();
        prop_assert!(convert(lo, &cfg, &mut l) <= convert(hi, &cfg, &mut l));
        let (cmin, cmax) = cfg.code_range();
        let c = convert(a, &cfg, &mut l);
        prop_assert!((cmin..=cmax).contains(&c));
    }

    #[test]
    fn compare_agrees_with_convert(v in -120.0f64..120.0, target in -100i64..100) {
        let cfg = AdcConfig::new(9).with_ref(SamplingRef::HalfVcm);
        let mut l = ledger();
        let code = convert(v, &cfg, &mut l);
        let out = compare_to_target(v, target, &cfg, &mut l).unwrap();
        match out.outcome {
            Outcome::Low => {
                prop_assert!(code < target);
                prop_assert_eq!(out.comparisons_used, 1);
            }
            Outcome::High => {
                prop_assert!(code > target);
                prop_assert_eq!(out.comparisons_used, 2);
            }
            Outcome::Equal => {
                prop_assert!((v - target as f64).abs() <= 0.5);
                prop_assert_eq!(out.comparisons_used, 2);
            }
        }
        if code == target {
            prop_assert_eq!(out.outcome, Outcome::Equal);
        }
    }

    #[test]
    fn ledger_merge_is_exact(
        a in prop::collection::vec(event(), 0..50),
        b in prop::collection::vec(event(), 0..50),
    ) {
        let (mut la, mut lb, mut all) = (ledger(), ledger(), ledger());
        for &e in &a {
            la.charge(e).unwrap();
            all.charge(e).unwrap();
        }
        for &e in &b {
            lb.charge(e).unwrap();
            all.charge(e).unwrap();
        }
        la.merge(&lb);
        prop_assert_eq!(&la, &all);
        prop_assert_eq!(la.total_ps(), all.tallies().map(|(_, t)| t.ps).sum::<u64>());
    }
}
