//! Trotterized ancilla-train evolution of the joint system (x) window state.

mod branch;
mod gates;
mod run;
mod state;
mod trajectory;
mod window;


pub use gates::system_half_step;
pub use run::{
    run_density_matrix, run_oscillator_reference, run_trajectories, run_trajectory, EngineOptions, EngineState,
    Representation, Simulator, StateKind,
};
pub use trajectory::{average_trajectories, log_log_slope, AveragedTrajectory, Measurement, Trajectory};
pub use window::{active_window, max_window_len, step_window};
