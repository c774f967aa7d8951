// SPDX-License-Identifier: Apache-2.0

//! Per-(scheme, grid point) aggregation of trial outcomes.

use serde::Serialize;
use statrs::statistics::Statistics;

use crate::cost::CostLedger;
use crate::wv::{IterationRecord, Scheme, WvResult};

/// Outcome of one column-pair programming trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub rms_cell_lsb: f64,
    pub rms_weight_lsb: f64,
    pub iterations: u32,
    pub converged: bool,
    pub ledger: CostLedger,
    pub trace: Vec<IterationRecord>,
}

impl From<WvResult> for TrialRecord {
    fn from(r: WvResult) -> Self {
        TrialRecord {
            rms_cell_lsb: r.rms_cell_lsb,
            rms_weight_lsb: r.rms_weight_lsb,
            iterations: r.iterations_used,
            converged: r.converged,
            ledger: r.cost,
            trace: r.trace,
        }
    }
}

impl TrialRecord {
    pub fn latency_ns(&self) -> f64 {
        self.ledger.total_ns()
    }

    pub fn energy_pj(&self) -> f64 {
        self.ledger.total_pj()
    }
}

/// Sample mean and standard deviation (n − 1 denominator; 0 for one sample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        match values.len() {
            0 => Moments {
                mean: f64::NAN,
                std: f64::NAN,
            },
            1 => Moments {
                mean: values[0],
                std: 0.0,
            },
            _ => Moments {
                mean: values.mean(),
                std: values.std_dev(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub axis: &'static str,
    pub grid_value: Option<f64>,
    pub scheme: Scheme,
    pub trials: usize,
    pub rms_cell_lsb: Moments,
    pub rms_weight_lsb: Moments,
    pub iterations: Moments,
    pub latency_ns: Moments,
    pub energy_pj: Moments,
    pub convergence_rate: f64,
    /// Event tallies summed over all trials.
    #[serde(skip)]
    pub events: CostLedger,
}

impl SummaryStats {
    pub fn from_trials(
        axis: &'static str,
        grid_value: Option<f64>,
        scheme: Scheme,
        trials: &[TrialRecord],
    ) -> Option<Self> {
        let first = trials.first()?;
        let col = |f: &dyn Fn(&TrialRecord) -> f64| -> Moments {
            Moments::of(&trials.iter().map(f).collect::<Vec<_>>())
        };
        let mut events = CostLedger::new(*first.ledger.params(), 0);
        for t in trials {
            events.merge(&t.ledger);
        }
        let converged = trials.iter().filter(|t| t.converged).count();
        Some(SummaryStats {
            axis,
            grid_value,
            scheme,
            trials: trials.len(),
            rms_cell_lsb: col(&|t| t.rms_cell_lsb),
            rms_weight_lsb: col(&|t| t.rms_weight_lsb),
            iterations: col(&|t| f64::from(t.iterations)),
            latency_ns: col(&|t| t.latency_ns()),
            energy_pj: col(&|t| t.energy_pj()),
            convergence_rate: converged as f64 / trials.len() as f64,
            events,
        })
    }

    pub fn csv_header() -> String {
        let mut cols: Vec<String> = [
            "axis",
            "grid_value",
            "scheme",
            "trials",
            "rms_cell_lsb_mean",
            "rms_cell_lsb_std",
            "rms_weight_lsb_mean",
            "rms_weight_lsb_std",
            "iterations_mean",
            "iterations_std",
            "latency_ns_mean",
            "latency_ns_std",
            "energy_pj_mean",
            "energy_pj_std",
            "convergence_rate",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let probe = CostLedger::new(Default::default(), 0);
        for (name, _) in probe.tallies() {
            cols.push(format!("{name}_events"));
            cols.push(format!("{name}_units"));
        }
        cols.extend(["saturations", "total_ps", "total_fj"].map(String::from));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let grid = self.grid_value.map(|v| v.to_string()).unwrap_or_default();
        let mut cols = vec![
            self.axis.to_string(),
            grid,
            self.scheme.to_string(),
            self.trials.to_string(),
        ];
        for m in [
            self.rms_cell_lsb,
            self.rms_weight_lsb,
            self.iterations,
            self.latency_ns,
            self.energy_pj,
        ] {
            cols.push(m.mean.to_string());
            cols.push(m.std.to_string());
        }
        cols.push(self.convergence_rate.to_string());
        for (_, t) in self.events.tallies() {
            cols.push(t.events.to_string());
            cols.push(t.units.to_string());
        }
        cols.push(self.events.saturations().to_string());
        cols.push(self.events.total_ps().to_string());
        cols.push(self.events.total_fj().to_string());
        cols.join(",")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or_default();
        if let Some(obj) = v.as_object_mut() {
            obj.insert("scheme".into(), self.scheme.to_string().into());
            obj.insert("events".into(), self.events.summary_json());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_hand_values() {
        let m = Moments::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Moments::of(&[3.0]).std, 0.0);
    }

    #[test]
    fn header_and_row_widths_agree() {
        let ledger = CostLedger::new(Default::default(), 9);
        let t = TrialRecord {
            rms_cell_lsb: 0.1,
            rms_weight_lsb: 0.2,
            iterations: 3,
            converged: true,
            ledger,
            trace: vec![],
        };
        let s = SummaryStats::from_trials("sigma", Some(0.7), Scheme::HdPv, &[t]).unwrap();
        assert_eq!(
            SummaryStats::csv_header().split(',').count(),
            s.csv_row().split(',').count()
        );
        assert_eq!(s.convergence_rate, 1.0);
    }
}
