// SPDX-License-Identifier: Apache-2.0

//! The write-and-verify loop for one weight column group.
//!
//! A group holds `N` weights bit-sliced over `k` signed column pairs. Each
//! pair is programmed independently: coarse SET staging from HRS, then fine
//! iterations of verify → streak update → four-phase column-parallel write
//! (SET⁺, RESET⁺, SET⁻, RESET⁻) until every cell is frozen or the iteration
//! cap is hit.

use serde::Serialize;

use crate::channel::{begin_sweep, signed_levels, ColumnPair, CommonModeMode, SweepContext};
use crate::cost::{CostLedger, EventKind};
use crate::device::{CellArray, Direction, PulseMode, PulseTarget};
use crate::error::{Error, Result};
use crate::mapper::slice_code;
use crate::rng::{purpose, SeedStream, SimRng};

use super::config::WvConfig;
use super::verify::{Decision, SweepOutcome, Verifier};

/// Per-cell consecutive-STOP counters with permanent freezing at `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreakCounter {
    k: u32,
    streak: Vec<u32>,
    frozen_at: Vec<Option<u32>>,
}

impl StreakCounter {
    pub fn new(cells: usize, k: u32) -> Self {
        StreakCounter {
            k,
            streak: vec![0; cells],
            frozen_at: vec![None; cells],
        }
    }

    pub fn freeze(&mut self, cell: usize, iteration: u32) {
        if self.frozen_at[cell].is_none() {
            self.frozen_at[cell] = Some(iteration);
        }
    }

    /// Fold one sweep's verdicts. Frozen cells ignore further verdicts.
    pub fn update(&mut self, decisions: &[Decision], iteration: u32) {
        for (i, &d) in decisions.iter().enumerate() {
            if self.frozen_at[i].is_some() {
                continue;
            }
            if d == Decision::Stop {
                self.streak[i] += 1;
                if self.streak[i] >= self.k {
                    self.frozen_at[i] = Some(iteration);
                }
            } else {
                self.streak[i] = 0;
            }
        }
    }

    pub fn is_frozen(&self, cell: usize) -> bool {
        self.frozen_at[cell].is_some()
    }

    pub fn streak(&self, cell: usize) -> u32 {
        self.streak[cell]
    }

    pub fn all_frozen(&self) -> bool {
        self.frozen_at.iter().all(Option::is_some)
    }

    pub fn frozen_count(&self) -> usize {
        self.frozen_at.iter().filter(|f| f.is_some()).count()
    }

    pub fn frozen_at(&self) -> &[Option<u32>] {
        &self.frozen_at
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub mean_abs_error_lsb: f64,
    pub frozen: usize,
    pub cumulative_ns: f64,
    pub cumulative_pj: f64,
}

/// Outcome of programming one signed column pair.
#[derive(Debug, Clone)]
pub struct ColumnRun {
    pub coarse_iterations: u32,
    pub fine_iterations: u32,
    /// Sweep index at which each cell froze; 0 for cells frozen before any sweep.
    pub freeze_trace: Vec<Option<u32>>,
    pub converged: bool,
    pub ledger: CostLedger,
    pub trace: Vec<IterationRecord>,
    /// Final signed error `(w⁺ − w⁻) − target` per cell, LSB.
    pub cell_error_lsb: Vec<f64>,
}

impl ColumnRun {
    pub fn iterations(&self) -> u32 {
        self.coarse_iterations + self.fine_iterations
    }
}

/// Physical cell and pulse direction realizing a signed verdict on a cell
/// whose target has sign `sign`.
fn physical(pair: ColumnPair, sign: i64, d: Decision) -> Option<(usize, Direction)> {
    let dir = match d {
        Decision::Stop => return None,
        Decision::Set => Direction::Set,
        Decision::Reset => Direction::Reset,
    };
    if sign >= 0 {
        Some((pair.pos, dir))
    } else {
        let neg = pair.neg.expect("negative targets need a signed pair");
        let flipped = match dir {
            Direction::Set => Direction::Reset,
            Direction::Reset => Direction::Set,
        };
        Some((neg, flipped))
    }
}

struct ColumnDriver<'a> {
    cfg: &'a WvConfig,
    verifier: &'a Verifier,
    pair: ColumnPair,
    targets: &'a [i64],
    stream: SeedStream,
    write_rng: SimRng,
    static_cm: Option<f64>,
    sweeps: u64,
    ledger: CostLedger,
    trace: Vec<IterationRecord>,
}

impl ColumnDriver<'_> {
    fn sweep(&mut self, array: &CellArray, threshold: f64, staging: bool) -> Result<SweepOutcome> {
        let mut rng = self.stream.child(purpose::READ, self.sweeps).rng();
        self.sweeps += 1;
        let mut ctx = begin_sweep(self.pair.pos, &self.cfg.noise, &mut rng);
        if let Some(mu) = self.static_cm {
            ctx = SweepContext { mu_cm: mu, ..ctx };
        }
        let levels = signed_levels(array, self.pair);
        let (t, l) = (self.targets, &mut self.ledger);
        if staging {
            self.verifier.staging_sweep(&levels, t, &ctx, threshold, l, &mut rng)
        } else {
            self.verifier.sweep(&levels, t, &ctx, threshold, l, &mut rng)
        }
    }

    fn pulses_for(&self, out: &SweepOutcome, cell: usize, step_lsb: f64) -> u32 {
        match &out.estimates {
            Some(est) if self.cfg.scheme.knows_magnitude() => {
                let dev = (est[cell] - self.targets[cell] as f64).abs();
                ((dev / step_lsb).round() as u32).clamp(1, self.cfg.max_pulses_per_iter)
            }
            _ => 1,
        }
    }

    fn write_phase(
        &mut self,
        array: &mut CellArray,
        phase: &[PulseTarget],
        mode: PulseMode,
    ) -> Result<()> {
        if phase.is_empty() {
            return Ok(());
        }
        array.apply_pulses(phase, mode, &mut self.write_rng)?;
        let max_pulses = phase.iter().map(|t| t.pulses).max().unwrap_or(0);
        self.ledger.charge(EventKind::WritePhase { max_pulses })
    }

    fn record(&mut self, array: &CellArray, iteration: u32, frozen: usize) {
        let levels = signed_levels(array, self.pair);
        let err: f64 = levels
            .iter()
            .zip(self.targets)
            .map(|(&l, &t)| (l - t as f64).abs())
            .sum::<f64>()
            / levels.len() as f64;
        self.trace.push(IterationRecord {
            iteration,
            mean_abs_error_lsb: err,
            frozen,
            cumulative_ns: self.ledger.total_ns(),
            cumulative_pj: self.ledger.total_pj(),
        });
    }
}

/// Program one signed column pair of `array` toward `targets` (signed levels).
pub fn run_column(
    array: &mut CellArray,
    pair: ColumnPair,
    targets: &[i64],
    cfg: &WvConfig,
    verifier: &Verifier,
    stream: SeedStream,
) -> Result<ColumnRun> {
    let n = cfg.column_len;
    if targets.len() != n || array.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: targets.len().min(array.rows()),
        });
    }
    let max_level = cfg.device.max_level();
    if let Some(&t) = targets.iter().find(|t| t.abs() > max_level) {
        return Err(Error::TargetNotRepresentable {
            target: t,
            max: max_level,
        });
    }
    if pair.neg.is_none() && targets.iter().any(|&t| t < 0) {
        return Err(Error::ConfigInconsistent(
            "negative targets need a signed column pair".into(),
        ));
    }

    let static_cm = match cfg.noise.cm_mode {
        CommonModeMode::PerSweep => None,
        CommonModeMode::PerColumn => {
            let mut rng = stream.child(purpose::COLUMN, 0).rng();
            Some(begin_sweep(pair.pos, &cfg.noise, &mut rng).mu_cm)
        }
    };
    let mut drv = ColumnDriver {
        cfg,
        verifier,
        pair,
        targets,
        stream,
        write_rng: stream.child(purpose::WRITE, 0).rng(),
        static_cm,
        sweeps: 0,
        ledger: CostLedger::new(cfg.cost, cfg.adc.resolution),
        trace: Vec::new(),
    };

    let mut streaks = StreakCounter::new(n, cfg.freeze_streak);
    for (i, &t) in targets.iter().enumerate() {
        if t == 0 {
            streaks.freeze(i, 0);
        }
    }
    let mut iteration = 0u32;
    drv.record(array, iteration, streaks.frozen_count());

    // Coarse staging: SET-only pulses from HRS while the verdict still says SET.
    let coarse_step = cfg.device.fine_step_lsb * f64::from(cfg.device.coarse_steps_per_pulse);
    let mut staging: Vec<bool> = targets.iter().map(|&t| t != 0).collect();
    let mut coarse_iterations = 0u32;
    while coarse_iterations < cfg.max_coarse_iters && staging.iter().any(|&s| s) {
        let out = drv.sweep(array, coarse_step / 2.0, true)?;
        coarse_iterations += 1;
        iteration += 1;
        let mut pos_phase = Vec::new();
        let mut neg_phase = Vec::new();
        for cell in 0..n {
            if !staging[cell] {
                continue;
            }
            match physical(pair, targets[cell].signum(), out.decisions[cell]) {
                Some((col, Direction::Set)) => {
                    let t = PulseTarget {
                        row: cell,
                        col,
                        direction: Direction::Set,
                        pulses: drv.pulses_for(&out, cell, coarse_step),
                    };
                    if col == pair.pos {
                        pos_phase.push(t);
                    } else {
                        neg_phase.push(t);
                    }
                }
                _ => staging[cell] = false,
            }
        }
        drv.write_phase(array, &pos_phase, PulseMode::Coarse)?;
        drv.write_phase(array, &neg_phase, PulseMode::Coarse)?;
        drv.record(array, iteration, streaks.frozen_count());
    }

    // Fine loop.
    let mut fine_iterations = 0u32;
    while fine_iterations < cfg.max_fine_iters && !streaks.all_frozen() {
        let out = drv.sweep(array, cfg.decision_threshold_lsb, false)?;
        fine_iterations += 1;
        iteration += 1;
        streaks.update(&out.decisions, iteration);

        // Phase order: SET⁺, RESET⁺, SET⁻, RESET⁻.
        let mut phases: [Vec<PulseTarget>; 4] = Default::default();
        for cell in 0..n {
            if streaks.is_frozen(cell) {
                continue;
            }
            if let Some((col, dir)) = physical(pair, targets[cell].signum(), out.decisions[cell]) {
                let slot = match (col == pair.pos, dir) {
                    (true, Direction::Set) => 0,
                    (true, Direction::Reset) => 1,
                    (false, Direction::Set) => 2,
                    (false, Direction::Reset) => 3,
                };
                phases[slot].push(PulseTarget {
                    row: cell,
                    col,
                    direction: dir,
                    pulses: drv.pulses_for(&out, cell, cfg.device.fine_step_lsb),
                });
            }
        }
        for phase in &phases {
            drv.write_phase(array, phase, PulseMode::Fine)?;
        }
        drv.record(array, iteration, streaks.frozen_count());
    }

    let levels = signed_levels(array, pair);
    let cell_error_lsb = levels
        .iter()
        .zip(targets)
        .map(|(&l, &t)| l - t as f64)
        .collect();
    Ok(ColumnRun {
        coarse_iterations,
        fine_iterations,
        converged: streaks.all_frozen(),
        freeze_trace: streaks.frozen_at().to_vec(),
        ledger: drv.ledger,
        trace: drv.trace,
        cell_error_lsb,
    })
}

/// Programmed state of `N` weights over `k` slice pairs.
#[derive(Debug, Clone)]
pub struct WvResult {
    /// Rows = weights, columns = `(pos, neg)` per slice, least significant first.
    pub array: CellArray,
    pub targets: Vec<i64>,
    pub columns: Vec<ColumnRun>,
    /// `[slice][row]` signed cell error, LSB.
    pub per_cell_error_lsb: Vec<Vec<f64>>,
    /// Binary-weighted recombination of the slice errors, in weight-code LSB.
    pub per_weight_error_lsb: Vec<f64>,
    pub rms_cell_lsb: f64,
    pub rms_weight_lsb: f64,
    /// Slowest slice column's sweep count.
    pub iterations_used: u32,
    pub cost: CostLedger,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
}

impl WvResult {
    pub fn final_conductances(&self) -> &[f64] {
        self.array.conductances()
    }

    pub fn mean_column_iterations(&self) -> f64 {
        let sum: u32 = self.columns.iter().map(ColumnRun::iterations).sum();
        f64::from(sum) / self.columns.len() as f64
    }

    pub fn freeze_trace(&self) -> Vec<Vec<Option<u32>>> {
        self.columns.iter().map(|c| c.freeze_trace.clone()).collect()
    }
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values {
        s += v * v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Merge per-column traces by iteration index; finished columns hold their
/// last record.
fn merge_traces(columns: &[ColumnRun]) -> Vec<IterationRecord> {
    let len = columns.iter().map(|c| c.trace.len()).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mut rec = IterationRecord {
                iteration: i as u32,
                mean_abs_error_lsb: 0.0,
                frozen: 0,
                cumulative_ns: 0.0,
                cumulative_pj: 0.0,
            };
            for c in columns {
                let r = c.trace[i.min(c.trace.len() - 1)];
                rec.mean_abs_error_lsb += r.mean_abs_error_lsb;
                rec.frozen += r.frozen;
                rec.cumulative_ns += r.cumulative_ns;
                rec.cumulative_pj += r.cumulative_pj;
            }
            rec.mean_abs_error_lsb /= columns.len() as f64;
            rec
        })
        .collect()
}

/// Program `codes.len() == N` signed weight codes. Slice `l` of every weight
/// lands on the column pair `(2l, 2l + 1)` of a fresh array.
pub fn run_wv(codes: &[i64], cfg: &WvConfig, stream: SeedStream) -> Result<WvResult> {
    let verifier = Verifier::new(cfg)?;
    run_wv_with(codes, cfg, &verifier, stream)
}

pub(crate) fn run_wv_with(
    codes: &[i64],
    cfg: &WvConfig,
    verifier: &Verifier,
    stream: SeedStream,
) -> Result<WvResult> {
    let n = cfg.column_len;
    if codes.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: codes.len(),
        });
    }
    let max = cfg.max_code();
    if let Some(&c) = codes.iter().find(|c| c.abs() > max) {
        return Err(Error::TargetNotRepresentable { target: c, max });
    }
    let k = cfg.slices();
    let bc = cfg.cell_bits();
    let mut slice_targets = vec![vec![0i64; n]; k];
    for (row, &code) in codes.iter().enumerate() {
        let slices = slice_code(code, cfg.weight_bits, bc)?;
        for (l, &s) in slices.iter().enumerate() {
            slice_targets[l][row] = code.signum() * i64::from(s);
        }
    }

    let mut array = CellArray::from_stream(n, 2 * k, cfg.device, stream)?;
    let mut columns = Vec::with_capacity(k);
    for (l, targets) in slice_targets.iter().enumerate() {
        let pair = ColumnPair::signed(2 * l, 2 * l + 1);
        let run = run_column(
            &mut array,
            pair,
            targets,
            cfg,
            verifier,
            stream.child(purpose::SLICE, l as u64),
        )?;
        columns.push(run);
    }

    let per_cell_error_lsb: Vec<Vec<f64>> =
        columns.iter().map(|c| c.cell_error_lsb.clone()).collect();
    let per_weight_error_lsb: Vec<f64> = (0..n)
        .map(|row| {
            per_cell_error_lsb
                .iter()
                .enumerate()
                .map(|(l, e)| e[row] * (1u64 << (l as u32 * bc)) as f64)
                .sum()
        })
        .collect();
    let mut cost = CostLedger::new(cfg.cost, cfg.adc.resolution);
    for c in &columns {
        cost.merge(&c.ledger);
    }
    Ok(WvResult {
        rms_cell_lsb: rms(per_cell_error_lsb.iter().flatten().copied()),
        rms_weight_lsb: rms(per_weight_error_lsb.iter().copied()),
        iterations_used: columns.iter().map(ColumnRun::iterations).max().unwrap_or(0),
        converged: columns.iter().all(|c| c.converged),
        trace: merge_traces(&columns),
        array,
        targets: codes.to_vec(),
        columns,
        per_cell_error_lsb,
        per_weight_error_lsb,
        cost,
    })
}
