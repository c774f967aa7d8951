// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rram_wv::harness::{
    run_experiment, run_selftest, ExperimentKind, ExperimentSpec, KvConfig, OutputFormat,
};
use rram_wv::{Error, Execution, Scheme};

#[derive(Parser, Debug)]
#[command(name = "rram-wv", version, about = "Write-and-verify simulator for RRAM crossbar columns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convergence comparison (or the experiment named in the config file).
    Run(Common),
    /// Sweep total read noise σ.
    SweepNoise(Common),
    /// Sweep the common-mode fraction ρ at fixed total σ.
    SweepRho(Common),
    /// Sweep the HARP threshold τ_w.
    SweepTau(Common),
    /// Multi-read averaging against HD-PV and HARP.
    CompareAveraging(Common),
    /// Quantize, map and program a weight tensor.
    ProgramTensor(Common),
    /// Run the exact-invariant checks.
    Selftest,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Comma-separated schemes: cwsc, hdpv, harp, multiread<M>.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    scheme: Option<Vec<Scheme>>,
    /// Comma-separated sweep values.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Output directory (default: $RRAM_WV_OUT or ./rram-wv-out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Summary format printed to stdout.
    #[arg(long, value_name = "FMT", value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Weight container to program (program-tensor).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Run(String),
}

fn build_spec(kind: ExperimentKind, c: &Common) -> Result<ExperimentSpec, Failure> {
    let kv = match &c.config {
        Some(path) => {
            if !path.is_file() {
                return Err(Failure::Usage(format!(
                    "config file not found: {}",
                    path.display()
                )));
            }
            KvConfig::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => KvConfig::default(),
    };
    // Subcommands other than `run` fix the experiment.
    if kind != ExperimentKind::Convergence {
        if let Some(named) = kv.get("experiment") {
            let named: ExperimentKind = named.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            if named != kind {
                return Err(Failure::Usage(format!(
                    "config names experiment '{named}' but the subcommand runs '{kind}'"
                )));
            }
        }
    }
    let mut spec = kv
        .to_spec(kind)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(seed) = c.seed {
        spec.seed = seed;
    }
    if let Some(t) = c.trials {
        spec.trials = t;
    }
    if let Some(s) = &c.scheme {
        spec.schemes = s.clone();
    }
    if let Some(g) = &c.grid {
        spec.grid = g.clone();
    }
    if let Some(o) = &c.out {
        spec.out_dir = o.clone();
    }
    if let Some(f) = c.format {
        spec.format = f;
    }
    if let Some(i) = &c.input {
        spec.input = Some(i.clone());
    }
    if c.sequential {
        spec.execution = Execution::Sequential;
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(spec)
}

fn run(kind: ExperimentKind, c: &Common) -> Result<(), Failure> {
    let spec = build_spec(kind, c)?;
    let out = run_experiment(&spec).map_err(|e| Failure::Run(e.to_string()))?;
    let eval = &out.evaluation;
    match spec.format {
        OutputFormat::Csv => {
            print!("{}", eval.summary_csv());
            if !eval.ratios.is_empty() {
                print!("{}", eval.ratios_csv());
            }
        }
        OutputFormat::Json => print!("{}", eval.summary_json()),
    }
    eprintln!(
        "{}: {} files in {} ({:.2} s)",
        spec.experiment,
        out.files.len(),
        spec.out_dir.display(),
        out.wall_time_s
    );
    Ok(())
}

fn selftest() -> Result<(), Failure> {
    let checks = run_selftest();
    let mut failed = 0;
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Failure::Run(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => run(ExperimentKind::Convergence, c),
        Command::SweepNoise(c) => run(ExperimentKind::NoiseSweep, c),
        Command::SweepRho(c) => run(ExperimentKind::RhoSweep, c),
        Command::SweepTau(c) => run(ExperimentKind::TauSweep, c),
        Command::CompareAveraging(c) => run(ExperimentKind::AveragingCompare, c),
        Command::ProgramTensor(c) => run(ExperimentKind::ProgramTensor, c),
        Command::Selftest => selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
