// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` configuration files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Keys are
//! applied in a fixed order so that structural settings (column length, cell
//! precision) re-derive the ADC resolution and cost table before any explicit
//! ADC or cost override lands.
//!
//! | key | meaning |
//! |-----|---------|
//! | `experiment` | convergence, noise-sweep, rho-sweep, tau-sweep, averaging-compare, program-tensor |
//! | `trials`, `seed` | trial count, master seed |
//! | `schemes` | comma list, e.g. `cwsc,hdpv,harp,multiread5` |
//! | `grid` | comma list of sweep values (σ, ρ, τ_w or M) |
//! | `out`, `input`, `format` | output directory, weight container, `csv` or `json` |
//! | `column_len`, `weight_bits`, `bits_per_cell` | array geometry and precision |
//! | `freeze_streak`, `tau_w`, `decision_threshold_lsb` | verify parameters |
//! | `max_fine_iters`, `max_coarse_iters`, `max_pulses_per_iter` | loop limits |
//! | `sigma`, `rho`, `cm_mode` | read noise (`per_sweep` or `per_column`) |
//! | `g_min`, `g_max`, `fine_step_lsb`, `coarse_steps_per_pulse` | device |
//! | `sigma_map_rel`, `d2d_sigma_rel`, `c2c_sigma_rel`, `nonlinearity` | device variation |
//! | `adc_bits`, `adc_full_scale_lsb` | ADC overrides |
//! | `cost.<field>` | any [`CostParams`] field |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::CommonModeMode;
use crate::cost::CostParams;
use crate::error::{Error, Result};

use super::experiment::{ExperimentKind, ExperimentSpec, OutputFormat};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidSpec(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(Error::InvalidSpec(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::InvalidSpec(format!("duplicate key '{key}'")));
            }
        }
        Ok(KvConfig { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Build a spec for `default_kind`, unless the file names its own experiment.
    pub fn to_spec(&self, default_kind: ExperimentKind) -> Result<ExperimentSpec> {
        let kind = match self.get("experiment") {
            Some(v) => v.parse()?,
            None => default_kind,
        };
        let mut spec = ExperimentSpec::defaults(kind);
        self.apply(&mut spec)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Apply every key onto `spec`. Unknown keys are rejected.
    pub fn apply(&self, spec: &mut ExperimentSpec) -> Result<()> {
        let mut seen = 0usize;
        let mut take = |key: &str| {
            let v = self.get(key);
            seen += usize::from(v.is_some());
            v
        };
        let b = &mut spec.base;

        let mut geometry = false;
        if let Some(v) = take("column_len") {
            b.column_len = num(v, "column_len")?;
            geometry = true;
        }
        if let Some(v) = take("bits_per_cell") {
            b.device.bits_per_cell = num(v, "bits_per_cell")?;
            geometry = true;
        }
        if geometry {
            *b = b.retune_adc();
        }
        if let Some(v) = take("adc_bits") {
            b.adc.resolution = num(v, "adc_bits")?;
            b.cost = CostParams::for_resolution(b.adc.resolution);
        }
        if let Some(v) = take("adc_full_scale_lsb") {
            b.adc.full_scale_lsb = num(v, "adc_full_scale_lsb")?;
        }
        macro_rules! field {
            ($key:literal, $place:expr) => {
                if let Some(v) = take($key) {
                    $place = num(v, $key)?;
                }
            };
        }
        field!("weight_bits", b.weight_bits);
        field!("freeze_streak", b.freeze_streak);
        field!("tau_w", b.tau_w);
        field!("decision_threshold_lsb", b.decision_threshold_lsb);
        field!("max_fine_iters", b.max_fine_iters);
        field!("max_coarse_iters", b.max_coarse_iters);
        field!("max_pulses_per_iter", b.max_pulses_per_iter);
        field!("sigma", b.noise.sigma_total_lsb);
        field!("rho", b.noise.rho);
        field!("g_min", b.device.g_min);
        field!("g_max", b.device.g_max);
        field!("fine_step_lsb", b.device.fine_step_lsb);
        field!("coarse_steps_per_pulse", b.device.coarse_steps_per_pulse);
        field!("sigma_map_rel", b.device.sigma_map_rel);
        field!("d2d_sigma_rel", b.device.d2d_sigma_rel);
        field!("c2c_sigma_rel", b.device.c2c_sigma_rel);
        field!("nonlinearity", b.device.nonlinearity);
        field!("cost.read_pulse_ns", b.cost.read_pulse_ns);
        field!("cost.sar_latency_ns", b.cost.sar_latency_ns);
        field!("cost.compare_latency_ns", b.cost.compare_latency_ns);
        field!("cost.tia_energy_pj", b.cost.tia_energy_pj);
        field!("cost.sar_energy_pj", b.cost.sar_energy_pj);
        field!("cost.compare_energy_pj", b.cost.compare_energy_pj);
        field!("cost.write_pulse_ns", b.cost.write_pulse_ns);
        field!("cost.write_pulse_energy_pj", b.cost.write_pulse_energy_pj);
        field!("cost.ih_decode_latency_ns", b.cost.ih_decode_latency_ns);
        field!("cost.ih_decode_energy_hdpv_pj", b.cost.ih_decode_energy_hdpv_pj);
        field!("cost.ih_decode_energy_harp_pj", b.cost.ih_decode_energy_harp_pj);
        if let Some(v) = take("cm_mode") {
            b.noise.cm_mode = match v.to_ascii_lowercase().replace('-', "_").as_str() {
                "per_sweep" => CommonModeMode::PerSweep,
                "per_column" => CommonModeMode::PerColumn,
                _ => return Err(Error::InvalidSpec(format!("cm_mode: unknown value '{v}'"))),
            };
        }

        field!("trials", spec.trials);
        field!("seed", spec.seed);
        if let Some(v) = take("schemes") {
            spec.schemes = parse_list(v)?;
        }
        if let Some(v) = take("grid") {
            spec.grid = parse_list(v)?;
        }
        if let Some(v) = take("out") {
            spec.out_dir = PathBuf::from(v);
        }
        if let Some(v) = take("input") {
            spec.input = Some(PathBuf::from(v));
        }
        if let Some(v) = take("format") {
            spec.format = v.parse()?;
        }
        take("experiment");

        if seen != self.entries.len() {
            let known = known_keys();
            let unknown: Vec<&str> = self
                .entries
                .keys()
                .map(String::as_str)
                .filter(|k| !known.contains(k))
                .collect();
            return Err(Error::InvalidSpec(format!("unknown keys: {}", unknown.join(", "))));
        }
        Ok(())
    }
}

fn known_keys() -> Vec<&'static str> {
    vec![
        "experiment", "trials", "seed", "schemes", "grid", "out", "input", "format",
        "column_len", "weight_bits", "bits_per_cell", "freeze_streak", "tau_w",
        "decision_threshold_lsb", "max_fine_iters", "max_coarse_iters", "max_pulses_per_iter",
        "sigma", "rho", "cm_mode", "g_min", "g_max", "fine_step_lsb", "coarse_steps_per_pulse",
        "sigma_map_rel", "d2d_sigma_rel", "c2c_sigma_rel", "nonlinearity", "adc_bits",
        "adc_full_scale_lsb", "cost.read_pulse_ns", "cost.sar_latency_ns",
        "cost.compare_latency_ns", "cost.tia_energy_pj", "cost.sar_energy_pj",
        "cost.compare_energy_pj", "cost.write_pulse_ns", "cost.write_pulse_energy_pj",
        "cost.ih_decode_latency_ns", "cost.ih_decode_energy_hdpv_pj",
        "cost.ih_decode_energy_harp_pj",
    ]
}

fn num<T: FromStr>(v: &str, key: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidSpec(format!("{key}: cannot parse '{v}'")))
}

/// Comma-separated list; empty items are skipped.
pub fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(s, "list"))
        .collect()
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidSpec(format!("format must be csv or json, got '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wv::Scheme;

    #[test]
    fn parses_comments_and_blanks() {
        let kv = KvConfig::parse("# header\n\ntrials = 7 # inline\nsigma=0.3\n").unwrap();
        assert_eq!(kv.get("trials"), Some("7"));
        assert_eq!(kv.get("sigma"), Some("0.3"));
    }

    #[test]
    fn rejects_garbage() {
        assert!(KvConfig::parse("trials 7").is_err());
        assert!(KvConfig::parse("a=1\na=2").is_err());
        let kv = KvConfig::parse("bogus = 1").unwrap();
        assert!(matches!(
            kv.to_spec(ExperimentKind::Convergence),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn column_len_retunes_adc() {
        let kv = KvConfig::parse("column_len = 64").unwrap();
        let spec = kv.to_spec(ExperimentKind::Convergence).unwrap();
        assert_eq!(spec.base.adc.resolution, 10);
        assert_eq!(spec.base.cost, CostParams::for_resolution(10));
    }

    #[test]
    fn overrides_apply() {
        let kv = KvConfig::parse(
            "experiment = rho-sweep\nschemes = cwsc, mr5\ngrid = 0,0.5\ncost.compare_energy_pj = 1.0\ncm_mode = per_column",
        )
        .unwrap();
        let spec = kv.to_spec(ExperimentKind::Convergence).unwrap();
        assert_eq!(spec.experiment, ExperimentKind::RhoSweep);
        assert_eq!(spec.schemes, vec![Scheme::CwSc, Scheme::MultiRead(5)]);
        assert_eq!(spec.grid, vec![0.0, 0.5]);
        assert_eq!(spec.base.cost.compare_energy_pj, 1.0);
        assert_eq!(spec.base.noise.cm_mode, CommonModeMode::PerColumn);
    }
}
