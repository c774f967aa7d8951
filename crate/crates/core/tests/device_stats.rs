// SPDX-License-Identifier: Apache-2.0

use rram_wv::rng::{purpose, SeedStream};
use rram_wv::{CellArray, DeviceParams, Direction, PulseMode, PulseTarget};

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (m, s)
}

#[test]
fn d2d_gain_spread_matches_parameter() {
    let p = DeviceParams::default();
    let a = CellArray::new(100, 100, p, 17).unwrap();
    let g: Vec<f64> = (0..100)
        .flat_map(|r| (0..100).map(move |c| (r, c)))
        .map(|(r, c)| a.d2d_gain(r, c))
        .collect();
    let (m, s) = mean_std(&g);
    assert!((0.095..=0.105).contains(&s), "d2d std {s}");
    assert!((m - 1.0).abs() < 0.005, "d2d mean {m}");
    assert!(g.iter().all(|&x| x >= 0.1));
    let b = CellArray::new(100, 100, p, 17).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mapping_noise_spread_per_write_phase() {
    let mut p = DeviceParams::default();
    p.c2c_sigma_rel = 0.0;
    p.d2d_sigma_rel = 0.0;
    p.nonlinearity = 0.0;
    let mid = 3.5 * p.g_lsb();
    let mut a = CellArray::new(10_000, 1, p, 3).unwrap();
    for r in 0..10_000 {
        a.set_conductance(r, 0, mid).unwrap();
    }
    let targets: Vec<PulseTarget> = (0..10_000)
        .map(|row| PulseTarget { row, col: 0, direction: Direction::Set, pulses: 1 })
        .collect();
    let mut rng = SeedStream::root(4).child(purpose::WRITE, 0).rng();
    a.apply_pulses(&targets, PulseMode::Fine, &mut rng).unwrap();
    let intended = mid + p.step(PulseMode::Fine);
    let err: Vec<f64> = (0..10_000).map(|r| a.conductance(r, 0) - intended).collect();
    let (m, s) = mean_std(&err);
    let want = 0.10 * p.g_max;
    assert!((s / want - 1.0).abs() < 0.03, "σ_map {s} vs {want}");
    assert!(m.abs() < 4.0 * want / 100.0);
}

fn mean_step(g0_lsb: f64, dir: Direction, trials: usize, p: DeviceParams) -> f64 {
    let mut a = CellArray::new(trials, 1, p, 21).unwrap();
    let g0 = g0_lsb * p.g_lsb();
    for r in 0..trials {
        a.set_conductance(r, 0, g0).unwrap();
    }
    let targets: Vec<PulseTarget> = (0..trials)
        .map(|row| PulseTarget { row, col: 0, direction: dir, pulses: 1 })
        .collect();
    let mut rng = SeedStream::root(22).rng();
    a.apply_pulses(&targets, PulseMode::Fine, &mut rng).unwrap();
    (0..trials).map(|r| a.conductance(r, 0) - g0).sum::<f64>() / trials as f64
}

#[test]
fn mean_step_follows_pulse_direction() {
    let mut p = DeviceParams::default();
    p.sigma_map_rel = 0.0;
    for level in [1.0, 3.5, 6.0] {
        assert!(mean_step(level, Direction::Set, 2000, p) > 0.0);
        assert!(mean_step(level, Direction::Reset, 2000, p) < 0.0);
    }
}

#[test]
fn saturating_asymmetry() {
    let mut p = DeviceParams::default();
    p.sigma_map_rel = 0.0;
    let set_low = mean_step(0.5, Direction::Set, 4000, p);
    let set_high = mean_step(6.5, Direction::Set, 4000, p);
    assert!(set_high.abs() < set_low.abs(), "{set_high} vs {set_low}");
    let reset_low = mean_step(0.5, Direction::Reset, 4000, p);
    let reset_high = mean_step(6.5, Direction::Reset, 4000, p);
    assert!(reset_low.abs() < reset_high.abs(), "{reset_low} vs {reset_high}");

    // shape(G) = exp(−λ·x): the mean SET step ratio is e^{-λ·Δx}.
    let want = (-(6.0 / 7.0) * p.nonlinearity).exp();
    let got = set_high / set_low;
    assert!((got / want - 1.0).abs() < 0.03, "{got} vs {want}");
}

#[test]
fn ideal_device_is_a_staircase() {
    let p = DeviceParams::ideal();
    let mut a = CellArray::new(1, 1, p, 0).unwrap();
    let mut rng = SeedStream::root(0).rng();
    let t = [PulseTarget { row: 0, col: 0, direction: Direction::Set, pulses: 4 }];
    a.apply_pulses(&t, PulseMode::Fine, &mut rng).unwrap();
    assert_eq!(a.level(0, 0), 1.0);
    a.apply_pulses(&[PulseTarget { pulses: 1, ..t[0] }], PulseMode::Coarse, &mut rng)
        .unwrap();
    assert_eq!(a.level(0, 0), 2.25);
    assert_eq!(a.pulse_count(0, 0).set, 5);
}
