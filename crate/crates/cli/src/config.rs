//! Run configuration: TOML schema, validation and conversion to core types.

use std::path::{Path, PathBuf};

use ata_core::engine::Representation;
use ata_core::linalg::{spectral_norm, CMat};
use ata_core::pipeline::{PipelineConfig, PlanOverrides, PlannerMode};
use ata_core::planner::{Hamiltonian, InitialState, SystemSpec};
use ata_core::spectral::{parse_psd_table, FrequencyGrid, PsdModel};
use ata_core::C;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Complex matrix as rows of `[re, im]` pairs.
pub type Matrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Pure,
    #[default]
    Density,
    Oscillator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub omega_max: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            omega_max: 16.0,
            points: 1024,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsdConfig {
    Gaussian { amplitude: f64, width: f64 },
    Lorentzian { weight: f64, rate: f64 },
    ThermalOhmic { coupling: f64, cutoff: f64, beta: f64 },
    Tabulated { omega: Vec<f64>, values: Vec<f64> },
    /// Text table, relative paths resolved against the config file.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Pure(Vec<[f64; 2]>),
    Density(Matrix),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    pub name: String,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub hamiltonian: Matrix,
    pub couplings: Vec<Matrix>,
    pub initial_state: StateConfig,
    #[serde(default)]
    pub observables: Vec<ObservableConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub epsilon: f64,
    pub total_time: f64,
    pub gamma: f64,
    #[serde(default)]
    pub engine: EngineKind,
    /// Levels per ancilla for the oscillator engine.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub representation: Representation,
    #[serde(default)]
    pub planner: PlannerMode,
    #[serde(default)]
    pub grid: GridConfig,
    pub psd: PsdConfig,
    pub system: SystemConfig,
    #[serde(default)]
    pub overrides: PlanOverrides<f64>,
}

fn default_levels() -> usize {
    3
}

fn default_trajectories() -> usize {
    100
}

fn default_output() -> PathBuf {
    PathBuf::from("ata-out")
}

fn invalid(what: impl Into<String>) -> CliError {
    CliError::validation(what)
}

fn matrix(name: &str, m: &Matrix) -> Result<CMat<f64>, CliError> {
    let n = m.len();
    if n == 0 || m.iter().any(|row| row.len() != n) {
        return Err(invalid(format!("{name} must be a non-empty square matrix")));
    }
    Ok(CMat::from_fn(n, n, |i, j| C::new(m[i][j][0], m[i][j][1])))
}

fn hermitian(name: &str, m: &Matrix, dim: usize) -> Result<CMat<f64>, CliError> {
    let a = matrix(name, m)?;
    if a.rows() != dim {
        return Err(invalid(format!("{name} dimension: expected {dim}, got {}", a.rows())));
    }
    if !a.is_hermitian(1e-10 * a.max_abs().max(1.0)) {
        return Err(invalid(format!("{name} hermiticity")));
    }
    Ok(a)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        if let PsdConfig::File { path: table } = &mut config.psd {
            if table.is_relative() {
                if let Some(dir) = path.parent() {
                    *table = dir.join(&*table);
                }
            }
        }
        Ok(config)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.total_time > 0.0) || !self.total_time.is_finite() {
            return Err(invalid(format!("total_time must be positive, got {}", self.total_time)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        if self.engine == EngineKind::Oscillator && self.levels < 2 {
            return Err(invalid("levels must be >= 2"));
        }
        if self.trajectories == 0 {
            return Err(invalid("trajectories must be >= 1"));
        }
        self.system_spec()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<FrequencyGrid<f64>, CliError> {
        FrequencyGrid::new(self.grid.omega_max, self.grid.points).map_err(CliError::from_core)
    }

    pub fn psd_model(&self) -> Result<PsdModel<f64>, CliError> {
        Ok(match &self.psd {
            PsdConfig::Gaussian { amplitude, width } => PsdModel::Gaussian {
                amplitude: *amplitude,
                width: *width,
            },
            PsdConfig::Lorentzian { weight, rate } => PsdModel::Lorentzian {
                weight: *weight,
                rate: *rate,
            },
            PsdConfig::ThermalOhmic { coupling, cutoff, beta } => PsdModel::ThermalOhmic {
                coupling: *coupling,
                cutoff: *cutoff,
                beta: *beta,
            },
            PsdConfig::Tabulated { omega, values } => PsdModel::Tabulated {
                omega: omega.clone(),
                values: values.clone(),
            },
            PsdConfig::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
                parse_psd_table(&text).map_err(CliError::from_core)?
            }
        })
    }

    pub fn system_spec(&self) -> Result<SystemSpec<f64>, CliError> {
        let sys = &self.system;
        let h = matrix("H_S", &sys.hamiltonian)?;
        let dim = h.rows();
        let h = hermitian("H_S", &sys.hamiltonian, dim)?;
        let couplings = sys
            .couplings
            .iter()
            .enumerate()
            .map(|(a, s)| {
                let name = format!("S[{a}]");
                let m = hermitian(&name, s, dim)?;
                let n = spectral_norm(&m);
                if (n - 1.0).abs() > 1e-9 {
                    return Err(invalid(format!("{name} must have unit operator norm, got {n}")));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if couplings.is_empty() {
            return Err(invalid("at least one coupling operator is required"));
        }
        let initial_state = match &sys.initial_state {
            StateConfig::Pure(v) => InitialState::Pure(v.iter().map(|z| C::new(z[0], z[1])).collect()),
            StateConfig::Density(m) => InitialState::Density(hermitian("initial density matrix", m, dim)?),
        };
        let mut names = std::collections::HashSet::new();
        let observables = sys
            .observables
            .iter()
            .map(|o| {
                if o.name.is_empty() || o.name.contains([',', '"', '\n']) || !names.insert(o.name.clone()) {
                    return Err(invalid(format!("observable name {:?} must be unique and CSV safe", o.name)));
                }
                Ok((o.name.clone(), hermitian(&format!("observable {}", o.name), &o.matrix, dim)?))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let spec = SystemSpec {
            dim,
            hamiltonian: Hamiltonian::Constant(h),
            couplings,
            gamma: self.gamma,
            initial_state,
            observables,
        };
        spec.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(spec)
    }

    pub fn pipeline(&self) -> PipelineConfig<f64> {
        let mut p = PipelineConfig::new(self.epsilon, self.total_time);
        p.overrides = self.overrides;
        p.mode = self.planner;
        p
    }
}
