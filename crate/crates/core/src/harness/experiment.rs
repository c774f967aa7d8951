// SPDX-License-Identifier: Apache-2.0

//! Experiment definitions and the trial runner.
//!
//! Trial `t` of every scheme and grid point draws its targets, device
//! variation and read noise from `root(seed) → trial(t)`, so schemes are
//! compared on identical columns and any grid point can be rerun alone.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::container::WeightContainer;
use crate::cost::sweep_cost_ratio;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::mapper::program_tensor;
use crate::rng::{purpose, SeedStream};
use crate::wv::{run_wv, Scheme, WvConfig};

use super::stats::{SummaryStats, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExperimentKind {
    Convergence,
    NoiseSweep,
    RhoSweep,
    TauSweep,
    AveragingCompare,
    ProgramTensor,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Convergence,
        ExperimentKind::NoiseSweep,
        ExperimentKind::RhoSweep,
        ExperimentKind::TauSweep,
        ExperimentKind::AveragingCompare,
        ExperimentKind::ProgramTensor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::NoiseSweep => "noise-sweep",
            ExperimentKind::RhoSweep => "rho-sweep",
            ExperimentKind::TauSweep => "tau-sweep",
            ExperimentKind::AveragingCompare => "averaging-compare",
            ExperimentKind::ProgramTensor => "program-tensor",
        }
    }

    /// Name of the swept parameter, if any.
    pub fn axis(self) -> &'static str {
        match self {
            ExperimentKind::NoiseSweep => "sigma",
            ExperimentKind::RhoSweep => "rho",
            ExperimentKind::TauSweep => "tau_w",
            ExperimentKind::AveragingCompare => "m",
            ExperimentKind::Convergence => "none",
            ExperimentKind::ProgramTensor => "group",
        }
    }

    fn is_sweep(self) -> bool {
        !matches!(
            self,
            ExperimentKind::Convergence | ExperimentKind::ProgramTensor
        )
    }

    fn default_grid(self) -> Vec<f64> {
        match self {
            ExperimentKind::NoiseSweep => vec![0.0, 0.35, 0.7, 1.05, 1.4],
            ExperimentKind::RhoSweep => vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            ExperimentKind::TauSweep => vec![2.0, 4.0, 6.0],
            ExperimentKind::AveragingCompare => vec![5.0],
            ExperimentKind::Convergence | ExperimentKind::ProgramTensor => vec![],
        }
    }

    fn default_schemes(self) -> Vec<Scheme> {
        match self {
            ExperimentKind::TauSweep => vec![Scheme::Harp],
            ExperimentKind::AveragingCompare => {
                vec![Scheme::MultiRead(5), Scheme::HdPv, Scheme::Harp]
            }
            _ => vec![Scheme::CwSc, Scheme::HdPv, Scheme::Harp],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        let found = ExperimentKind::ALL.into_iter().find(|k| {
            let name = k.name().replace('-', "");
            // Accept both "noise-sweep" and the CLI spelling "sweep-noise".
            let flipped: String = match k.name().split_once('-') {
                Some((a, b)) => format!("{b}{a}"),
                None => name.clone(),
            };
            key == name || key == flipped
        });
        found.ok_or_else(|| Error::InvalidSpec(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    /// Values of the swept parameter; empty for single-point experiments.
    pub grid: Vec<f64>,
    pub base: WvConfig,
    pub out_dir: PathBuf,
    /// Weight container for `ProgramTensor`; a synthetic tensor is used when absent.
    pub input: Option<PathBuf>,
    /// Format of the summary printed to stdout. Files are always written in both.
    pub format: OutputFormat,
    #[serde(skip)]
    pub execution: Execution,
}

impl ExperimentSpec {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        ExperimentSpec {
            experiment,
            trials: 100,
            seed: 0,
            schemes: experiment.default_schemes(),
            grid: experiment.default_grid(),
            base: WvConfig::default(),
            out_dir: super::default_out_dir(),
            input: None,
            format: OutputFormat::Csv,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        if self.experiment.is_sweep() && self.grid.is_empty() {
            return bad(format!("{} needs a nonempty grid", self.experiment));
        }
        if !self.experiment.is_sweep() && !self.grid.is_empty() {
            return bad(format!("{} takes no grid", self.experiment));
        }
        for &v in &self.grid {
            let ok = match self.experiment {
                ExperimentKind::NoiseSweep => v.is_finite() && v >= 0.0,
                ExperimentKind::RhoSweep => (0.0..=1.0).contains(&v),
                ExperimentKind::TauSweep | ExperimentKind::AveragingCompare => {
                    v.fract() == 0.0 && v >= 0.0 && v <= f64::from(i32::MAX)
                }
                _ => true,
            };
            if !ok {
                return bad(format!("grid value {v} invalid for {}", self.experiment.axis()));
            }
        }
        if self.experiment == ExperimentKind::AveragingCompare && self.grid.contains(&0.0) {
            return bad("averaging count M must be >= 1".into());
        }
        for point in self.grid_points() {
            for scheme in self.schemes_at(point) {
                self.config_at(point, scheme).validate()?;
            }
        }
        Ok(())
    }

    pub fn grid_points(&self) -> Vec<Option<f64>> {
        if self.grid.is_empty() {
            vec![None]
        } else {
            self.grid.iter().copied().map(Some).collect()
        }
    }

    /// Schemes evaluated at `point`. Averaging sweeps substitute the grid
    /// value into every multi-read scheme.
    pub fn schemes_at(&self, point: Option<f64>) -> Vec<Scheme> {
        match (self.experiment, point) {
            (ExperimentKind::AveragingCompare, Some(m)) => {
                let mut out: Vec<Scheme> = Vec::new();
                for s in &self.schemes {
                    let s = match s {
                        Scheme::MultiRead(_) => Scheme::MultiRead(m as u32),
                        other => *other,
                    };
                    if !out.contains(&s) {
                        out.push(s);
                    }
                }
                out
            }
            _ => self.schemes.clone(),
        }
    }

    pub fn config_at(&self, point: Option<f64>, scheme: Scheme) -> WvConfig {
        let mut cfg = self.base.with_scheme(scheme);
        cfg.seed = self.seed;
        if let Some(v) = point {
            match self.experiment {
                ExperimentKind::NoiseSweep => cfg.noise.sigma_total_lsb = v,
                ExperimentKind::RhoSweep => cfg.noise.rho = v,
                ExperimentKind::TauSweep => cfg.tau_w = v as i32,
                _ => {}
            }
        }
        cfg
    }
}

/// Uniform signed weight codes for one trial column.
pub fn trial_codes(trial: SeedStream, cfg: &WvConfig) -> Vec<i64> {
    let max = cfg.max_code();
    let mut rng = trial.child(purpose::TARGETS, 0).rng();
    (0..cfg.column_len)
        .map(|_| rng.random_range(-max..=max))
        .collect()
}

pub fn trial_stream(seed: u64, trial: usize) -> SeedStream {
    SeedStream::root(seed).child(purpose::TRIAL, trial as u64)
}

/// Run `trials` independent column-pair trials of one configuration.
pub fn run_trials(cfg: &WvConfig, trials: usize, exec: Execution) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    map_indexed(trials, exec, |t| {
        let stream = trial_stream(cfg.seed, t);
        run_wv(&trial_codes(stream, cfg), cfg, stream).map(TrialRecord::from)
    })
    .into_iter()
    .collect()
}

/// Multi-read vs Hadamard cost ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub grid_value: Option<f64>,
    pub numerator: String,
    pub denominator: String,
    pub sweep_read_ratio: f64,
    pub sweep_latency_ratio: f64,
    pub sweep_energy_ratio: f64,
    pub run_read_ratio: f64,
    pub run_latency_ratio: f64,
    pub run_energy_ratio: f64,
}

impl RatioRow {
    const HEADER: &'static str = "grid_value,numerator,denominator,sweep_read_ratio,sweep_latency_ratio,sweep_energy_ratio,run_read_ratio,run_latency_ratio,run_energy_ratio";

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.grid_value.map(|v| v.to_string()).unwrap_or_default(),
            self.numerator,
            self.denominator,
            self.sweep_read_ratio,
            self.sweep_latency_ratio,
            self.sweep_energy_ratio,
            self.run_read_ratio,
            self.run_latency_ratio,
            self.run_energy_ratio
        )
    }
}

/// In-memory experiment result; [`write_outputs`] renders it to disk.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub spec: ExperimentSpec,
    pub summaries: Vec<SummaryStats>,
    pub ratios: Vec<RatioRow>,
    /// `iterations.csv` body.
    pub iterations_csv: String,
    pub programmed: Vec<(Scheme, WeightContainer)>,
}

impl Evaluation {
    pub fn summary(&self, point: Option<f64>, scheme: Scheme) -> Option<&SummaryStats> {
        self.summaries
            .iter()
            .find(|s| s.grid_value == point && s.scheme == scheme)
    }

    pub fn summary_csv(&self) -> String {
        let mut s = SummaryStats::csv_header();
        s.push('\n');
        for row in &self.summaries {
            s.push_str(&row.csv_row());
            s.push('\n');
        }
        s
    }

    pub fn summary_json(&self) -> String {
        let rows: Vec<_> = self.summaries.iter().map(SummaryStats::to_json).collect();
        let mut v = serde_json::json!({
            "experiment": self.spec.experiment.name(),
            "axis": self.spec.experiment.axis(),
            "rows": rows,
        });
        if !self.ratios.is_empty() {
            v["ratios"] = serde_json::to_value(&self.ratios).unwrap_or_default();
        }
        serde_json::to_string_pretty(&v).unwrap_or_default() + "\n"
    }

    pub fn ratios_csv(&self) -> String {
        let mut s = format!("{}\n", RatioRow::HEADER);
        for r in &self.ratios {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }
}

const ITER_HEADER: &str =
    "axis,grid_value,scheme,trial,iteration,mean_abs_error_lsb,frozen,cumulative_ns,cumulative_pj\n";

fn push_trace(out: &mut String, axis: &str, point: Option<f64>, scheme: Scheme, trial: usize, r: &TrialRecord) {
    let grid = point.map(|v| v.to_string()).unwrap_or_default();
    for it in &r.trace {
        let _ = writeln!(
            out,
            "{axis},{grid},{scheme},{trial},{},{},{},{},{}",
            it.iteration, it.mean_abs_error_lsb, it.frozen, it.cumulative_ns, it.cumulative_pj
        );
    }
}

/// Execute every trial of `spec` without touching the filesystem, except
/// for reading `spec.input`.
pub fn evaluate(spec: &ExperimentSpec) -> Result<Evaluation> {
    spec.validate()?;
    if spec.experiment == ExperimentKind::ProgramTensor {
        return evaluate_tensor(spec);
    }
    let axis = spec.experiment.axis();
    let mut jobs: Vec<(Option<f64>, Scheme)> = Vec::new();
    for point in spec.grid_points() {
        for scheme in spec.schemes_at(point) {
            jobs.push((point, scheme));
        }
    }
    let configs: Vec<WvConfig> = jobs.iter().map(|&(p, s)| spec.config_at(p, s)).collect();
    // Flattened so the worker pool sees every (job, trial) pair at once.
    let flat = map_indexed(jobs.len() * spec.trials, spec.execution, |i| {
        let cfg = &configs[i / spec.trials];
        let stream = trial_stream(spec.seed, i % spec.trials);
        run_wv(&trial_codes(stream, cfg), cfg, stream).map(TrialRecord::from)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut summaries = Vec::with_capacity(jobs.len());
    let mut iterations_csv = String::from(ITER_HEADER);
    for (j, &(point, scheme)) in jobs.iter().enumerate() {
        let trials = &flat[j * spec.trials..(j + 1) * spec.trials];
        for (t, r) in trials.iter().enumerate() {
            push_trace(&mut iterations_csv, axis, point, scheme, t, r);
        }
        summaries.extend(SummaryStats::from_trials(axis, point, scheme, trials));
    }
    let ratios = if spec.experiment == ExperimentKind::AveragingCompare {
        averaging_ratios(spec, &summaries)
    } else {
        Vec::new()
    };
    Ok(Evaluation {
        spec: spec.clone(),
        summaries,
        ratios,
        iterations_csv,
        programmed: Vec::new(),
    })
}

fn averaging_ratios(spec: &ExperimentSpec, summaries: &[SummaryStats]) -> Vec<RatioRow> {
    let n = spec.base.column_len;
    let mut rows = Vec::new();
    for point in spec.grid_points() {
        let at = |s: Scheme| {
            summaries
                .iter()
                .find(|x| x.grid_value == point && x.scheme == s)
        };
        let schemes = spec.schemes_at(point);
        for &num in schemes.iter().filter(|s| matches!(s, Scheme::MultiRead(_))) {
            for &den in schemes.iter().filter(|s| s.uses_hadamard()) {
                let (Some(a), Some(b)) = (at(num), at(den)) else {
                    continue;
                };
                let (sweep_lat, sweep_en) = sweep_cost_ratio(num, den, n, &spec.base.cost);
                rows.push(RatioRow {
                    grid_value: point,
                    numerator: num.to_string(),
                    denominator: den.to_string(),
                    sweep_read_ratio: num.reads_per_sweep(n) as f64 / den.reads_per_sweep(n) as f64,
                    sweep_latency_ratio: sweep_lat,
                    sweep_energy_ratio: sweep_en,
                    run_read_ratio: a.events.read_patterns() as f64 / b.events.read_patterns() as f64,
                    run_latency_ratio: a.latency_ns.mean / b.latency_ns.mean,
                    run_energy_ratio: a.energy_pj.mean / b.energy_pj.mean,
                });
            }
        }
    }
    rows
}

/// Deterministic Gaussian tensor used when no input container is given.
pub fn synthetic_tensor(seed: u64) -> WeightContainer {
    let shape = vec![64, 64];
    let mut rng = SeedStream::root(seed).child(purpose::TARGETS, 0).rng();
    let values = (0..64 * 64).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    WeightContainer::new(shape, values).expect("shape matches value count")
}

fn evaluate_tensor(spec: &ExperimentSpec) -> Result<Evaluation> {
    let input = match &spec.input {
        Some(path) => WeightContainer::read(path)?,
        None => synthetic_tensor(spec.seed),
    };
    let axis = spec.experiment.axis();
    let mut summaries = Vec::new();
    let mut programmed = Vec::new();
    let mut iterations_csv = String::from(ITER_HEADER);
    for &scheme in &spec.schemes {
        let cfg = spec.config_at(None, scheme);
        let p = program_tensor(&input.values, input.header.shape.clone(), &cfg, spec.execution)?;
        let per_column_rms: Vec<f64> = p
            .groups
            .iter()
            .flat_map(|g| {
                g.per_cell_error_lsb.iter().map(|col| {
                    (col.iter().map(|e| e * e).sum::<f64>() / col.len() as f64).sqrt()
                })
            })
            .collect();
        let mut out = WeightContainer::new(input.header.shape.clone(), p.readback())?;
        out.header.bits = Some(cfg.weight_bits);
        out.header.scale = Some(p.mapping.scale);
        out.header.seed = Some(spec.seed);
        out.header.provenance = Some(serde_json::json!({
            "scheme": scheme.to_string(),
            "sigma_total_lsb": cfg.noise.sigma_total_lsb,
            "rho": cfg.noise.rho,
            "sigma_map_rel": cfg.device.sigma_map_rel,
            "rms_weight_lsb": p.rms_weight_lsb(),
            "per_column_rms_lsb": per_column_rms,
        }));
        let records: Vec<TrialRecord> = p.groups.into_iter().map(TrialRecord::from).collect();
        for (g, r) in records.iter().enumerate() {
            push_trace(&mut iterations_csv, axis, None, scheme, g, r);
        }
        summaries.extend(SummaryStats::from_trials(axis, None, scheme, &records));
        programmed.push((scheme, out));
    }
    Ok(Evaluation {
        spec: spec.clone(),
        summaries,
        ratios: Vec::new(),
        iterations_csv,
        programmed,
    })
}

/// Files written by [`run_experiment`] and the summary.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub evaluation: Evaluation,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
}

fn write_file(dir: &Path, name: &str, body: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Error::unwritable(&path, e))?;
    files.push(path);
    Ok(())
}

/// Write every artifact of `eval` into `spec.out_dir`. Everything except the
/// manifest's wall-time field is a pure function of the `ExperimentSpec`.
pub fn write_outputs(eval: &Evaluation, wall_time_s: f64) -> Result<Vec<PathBuf>> {
    let spec = &eval.spec;
    let dir = &spec.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::unwritable(dir, e))?;
    let mut files = Vec::new();
    write_file(dir, "iterations.csv", &eval.iterations_csv, &mut files)?;
    write_file(dir, "summary.csv", &eval.summary_csv(), &mut files)?;
    write_file(dir, "summary.json", &eval.summary_json(), &mut files)?;
    if !eval.ratios.is_empty() {
        write_file(dir, "ratios.csv", &eval.ratios_csv(), &mut files)?;
    }
    for (scheme, c) in &eval.programmed {
        write_file(dir, &format!("programmed_{scheme}.txt"), &c.to_text()?, &mut files)?;
    }
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": spec.experiment.name(),
        "spec": spec,
        "seeds": {
            "master": spec.seed,
            "trial_stream": "root(master) -> trial(t); targets, device and reads split below it",
        },
        "statistics": "mean and sample standard deviation (n - 1) over trials",
        "files": names,
        "wall_time_s": wall_time_s,
    });
    let body = serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n";
    write_file(dir, "manifest.json", &body, &mut files)?;
    Ok(files)
}

/// Evaluate `spec` and write its artifacts.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let evaluation = evaluate(spec)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let files = write_outputs(&evaluation, wall_time_s)?;
    Ok(ExperimentOutput {
        evaluation,
        files,
        wall_time_s,
    })
}
