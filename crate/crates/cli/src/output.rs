//! Result files: time-series CSV and JSON metadata.

use std::fmt::Write as _;
use std::path::Path;

use ata_core::pipeline::Prepared;
use ata_core::planner::{CommutatorScale, ResourceEstimate, SimulationPlan};
use ata_core::spectral::BathScales;
use serde::Serialize;

use crate::config::{EngineKind, RunConfig};
use crate::error::CliError;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `t,<names>` plus `<name>_stderr` columns when `stderr` is given.
pub fn time_series_csv(times: &[f64], names: &[String], values: &[Vec<f64>], stderr: Option<&[Vec<f64>]>) -> String {
    let mut out = String::from("t");
    for n in names {
        write!(out, ",{n}").unwrap();
    }
    if stderr.is_some() {
        for n in names {
            write!(out, ",{n}_stderr").unwrap();
        }
    }
    out.push('\n');
    for (m, &t) in times.iter().enumerate() {
        out.push_str(&num(t));
        for v in values {
            write!(out, ",{}", num(v[m])).unwrap();
        }
        if let Some(se) = stderr {
            for v in se {
                write!(out, ",{}", num(v[m])).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
pub struct Metadata<'a> {
    pub version: &'static str,
    pub command: &'static str,
    pub engine: EngineKind,
    pub ancilla_levels: usize,
    /// `branch`, `dense` or `none` for a windowless run.
    pub representation: &'static str,
    pub master_seed: u64,
    pub trajectories: usize,
    pub final_time: f64,
    pub plan: &'a SimulationPlan<f64>,
    pub filter_cutoff: f64,
    pub uv_cutoff: Option<f64>,
    pub scales: &'a BathScales<f64>,
    pub commutators: &'a CommutatorScale<f64>,
    pub resources: &'a ResourceEstimate,
    pub config: &'a RunConfig,
}

impl<'a> Metadata<'a> {
    pub fn new(command: &'static str, config: &'a RunConfig, prepared: &'a Prepared<f64>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            command,
            engine: config.engine,
            ancilla_levels: if config.engine == EngineKind::Oscillator {
                config.levels
            } else {
                2
            },
            representation: "none",
            master_seed: config.seed,
            trajectories: if config.engine == EngineKind::Pure {
                config.trajectories
            } else {
                1
            },
            final_time: prepared.plan.time(prepared.plan.steps),
            plan: &prepared.plan,
            filter_cutoff: prepared.cutoff,
            uv_cutoff: prepared.lambda,
            scales: &prepared.scales,
            commutators: &prepared.commutators,
            resources: &prepared.resources,
            config,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes");
        s.push('\n');
        s
    }
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}
