//! Classical simulator of the ancilla train algorithm for open quantum
//! systems coupled to Gaussian baths.
//!
//! The bath is replaced by a sliding train of ancilla qubits coupled to the
//! system through the filtered jump correlator. The joint state is advanced
//! by second-order Trotter steps, and ancillas leaving the coupling window
//! are measured (or traced out) and recycled.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

pub mod engine;
pub mod error;
pub mod linalg;
pub mod noise;
pub mod oracle;
pub mod pipeline;
pub mod planner;
pub mod rng;
pub mod scalar;
pub mod spectral;

pub use error::{AtaError, Result};
pub use scalar::{Real, C};

pub type CMat64 = linalg::CMat<f64>;
pub type FrequencyGrid64 = spectral::FrequencyGrid<f64>;
pub type PsdModel64 = spectral::PsdModel<f64>;
pub type SampledPsd64 = spectral::SampledPsd<f64>;
pub type Correlator64 = spectral::Correlator<f64>;
pub type BathScales64 = spectral::BathScales<f64>;
pub type Simulator64 = engine::Simulator<f64>;
pub type Trajectory64 = engine::Trajectory<f64>;
pub type SimulationPlan64 = planner::SimulationPlan<f64>;
pub type SystemSpec64 = planner::SystemSpec<f64>;
