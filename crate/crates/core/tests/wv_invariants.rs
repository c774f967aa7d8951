// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use rram_wv::harness::{trial_codes, trial_stream};
use rram_wv::wv::StreakCounter;
use rram_wv::{run_wv, Decision, DeviceParams, NoiseParams, Scheme, SeedStream, WvConfig};

const SCHEMES: [Scheme; 4] = [Scheme::CwSc, Scheme::MultiRead(5), Scheme::HdPv, Scheme::Harp];

fn config(scheme: Scheme, sigma: f64, rho: f64) -> WvConfig {
    let mut cfg = WvConfig::for_column_len(32).with_scheme(scheme);
    cfg.noise = NoiseParams::new(sigma, rho);
    cfg
}

fn pulses_per_row(res: &rram_wv::WvResult, row: usize, col: usize) -> u32 {
    res.array.pulse_count(row, col).total()
}

#[test]
fn frozen_cells_are_never_pulsed_again() {
    for scheme in SCHEMES {
        let full = config(scheme, 0.7, 0.2);
        for trial in 0..4 {
            let stream = trial_stream(3, trial);
            let codes = trial_codes(stream, &full);
            let long = run_wv(&codes, &full, stream).unwrap();
            for j in [1u32, 3, 6] {
                let mut cut = full;
                cut.max_fine_iters = j;
                let short = run_wv(&codes, &cut, stream).unwrap();
                for (l, col) in long.columns.iter().enumerate() {
                    let horizon = col.coarse_iterations + j;
                    for (row, f) in col.freeze_trace.iter().enumerate() {
                        if matches!(f, Some(it) if *it <= horizon) {
                            for c in [2 * l, 2 * l + 1] {
                                assert_eq!(
                                    pulses_per_row(&short, row, c),
                                    pulses_per_row(&long, row, c),
                                    "{scheme} trial {trial} slice {l} row {row} j {j}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn ledger_reads_match_sweeps() {
    for scheme in SCHEMES {
        let cfg = config(scheme, 0.7, 0.2);
        for trial in 0..5 {
            let stream = trial_stream(11, trial);
            let res = run_wv(&trial_codes(stream, &cfg), &cfg, stream).unwrap();
            let sweeps: u64 = res.columns.iter().map(|c| u64::from(c.iterations())).sum();
            assert_eq!(
                res.cost.read_patterns(),
                scheme.reads_per_sweep(32) as u64 * sweeps,
                "{scheme}"
            );
            let per_column: u64 = res.columns.iter().map(|c| c.ledger.total_ps()).sum();
            assert_eq!(res.cost.total_ps(), per_column);
            let fine: u64 = res.columns.iter().map(|c| u64::from(c.fine_iterations)).sum();
            let decodes = match scheme {
                Scheme::HdPv => sweeps,
                Scheme::Harp => fine,
                _ => 0,
            };
            assert_eq!(res.cost.decodes(), decodes, "{scheme}");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for scheme in SCHEMES {
        let cfg = config(scheme, 0.7, 0.5);
        let stream = trial_stream(42, 0);
        let codes = trial_codes(stream, &cfg);
        let a = run_wv(&codes, &cfg, stream).unwrap();
        let b = run_wv(&codes, &cfg, stream).unwrap();
        assert_eq!(a.final_conductances(), b.final_conductances());
        assert_eq!(a.cost, b.cost);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.freeze_trace(), b.freeze_trace());
    }
}

#[test]
fn noiseless_ideal_run_lands_within_dead_band() {
    for scheme in SCHEMES {
        let mut cfg = config(scheme, 0.0, 0.0);
        cfg.device = DeviceParams::ideal();
        for trial in 0..5 {
            let stream = trial_stream(1, trial);
            let res = run_wv(&trial_codes(stream, &cfg), &cfg, stream).unwrap();
            if scheme != Scheme::Harp {
                assert!(res.converged, "{scheme}");
            }
            for col in &res.per_cell_error_lsb {
                assert!(col.iter().all(|e| e.abs() <= 0.5), "{scheme}: {col:?}");
            }
        }
    }
}

#[test]
fn negated_codes_mirror_on_an_ideal_array() {
    for scheme in SCHEMES {
        let mut cfg = config(scheme, 0.0, 0.0);
        cfg.device = DeviceParams::ideal();
        let stream = trial_stream(5, 0);
        let codes = trial_codes(stream, &cfg);
        let neg: Vec<i64> = codes.iter().map(|c| -c).collect();
        let a = run_wv(&codes, &cfg, stream).unwrap();
        let b = run_wv(&neg, &cfg, stream).unwrap();
        for (x, y) in a.per_weight_error_lsb.iter().zip(&b.per_weight_error_lsb) {
            assert_eq!(*x, -*y, "{scheme}");
        }
        assert_eq!(a.cost.read_patterns(), b.cost.read_patterns(), "{scheme}");
        assert_eq!(a.cost.write_pulses(), b.cost.write_pulses(), "{scheme}");
    }
}

#[test]
fn all_zero_group_needs_no_sweeps() {
    let cfg = config(Scheme::Harp, 0.7, 0.2);
    let res = run_wv(&[0; 32], &cfg, SeedStream::root(0)).unwrap();
    assert!(res.converged);
    assert_eq!(res.iterations_used, 0);
    assert_eq!(res.cost.total_ps(), 0);
}

#[test]
fn harp_flags_a_lone_deviant_from_its_compares() {
    let mut cfg = WvConfig::for_column_len(8).with_scheme(Scheme::Harp);
    cfg.noise = NoiseParams::noiseless();
    let v = rram_wv::wv::Verifier::new(&cfg).unwrap();
    let targets = [3i64, 5, 0, 2, 7, 1, 4, 6];
    let mut levels: Vec<f64> = targets.iter().map(|&t| t as f64).collect();
    levels[5] = 3.0;
    let ctx = rram_wv::SweepContext { column: 0, mu_cm: 0.0 };
    let mut ledger = rram_wv::CostLedger::new(cfg.cost, cfg.adc.resolution);
    let out = v
        .sweep(&levels, &targets, &ctx, 0.5, &mut ledger, &mut SeedStream::root(0).rng())
        .unwrap();
    let mut want = vec![Decision::Stop; 8];
    want[5] = Decision::Reset;
    assert_eq!(out.decisions, want);
}

fn decision() -> impl Strategy<Value = Decision> {
    prop_oneof![Just(Decision::Stop), Just(Decision::Set), Just(Decision::Reset)]
}

proptest! {
    #[test]
    fn streak_freezes_on_first_run_of_k(
        k in 1u32..=4,
        seq in prop::collection::vec(decision(), 0..40),
    ) {
        let mut s = StreakCounter::new(1, k);
        for (i, &d) in seq.iter().enumerate() {
            s.update(&[d], i as u32 + 1);
        }
        // Oracle: first index where k consecutive Stops end.
        let mut run = 0;
        let mut want = None;
        for (i, &d) in seq.iter().enumerate() {
            run = if d == Decision::Stop { run + 1 } else { 0 };
            if run >= k {
                want = Some(i as u32 + 1);
                break;
            }
        }
        prop_assert_eq!(s.frozen_at()[0], want);
        prop_assert_eq!(s.is_frozen(0), want.is_some());
    }
}
