use thiserror::Error;

/// Errors raised by the simulator core.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum AtaError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("power spectral density is not positive semidefinite at omega = {omega} (min eigenvalue {min_eigenvalue:e})")]
    NonPositivePsd { omega: f64, min_eigenvalue: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("bath is identically zero")]
    ZeroBath,
    #[error("no grid frequency satisfies the cutoff condition up to omega_max = {omega_max}; widen the frequency grid")]
    CutoffNotOnGrid { omega_max: f64 },
    #[error("bath rate is zero; the run reduces to unitary system evolution")]
    DegenerateBath,
    #[error("infeasible plan: {0}")]
    InfeasiblePlan(String),
    #[error("ancilla window mismatch: {0}")]
    WindowMismatch(String),
    #[error("jump correlator is complex (max |Im g| = {max_imag:e}); classical noise needs an even PSD")]
    ComplexKernel { max_imag: f64 },
    #[error("model is not pure dephasing: {0}")]
    NotDephasing(String),
    #[error("power spectral density is not even (asymmetry {asymmetry:e})")]
    NotEven { asymmetry: f64 },
    #[error("invalid system specification: {0}")]
    InvalidSystem(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = AtaError> = std::result::Result<T, E>;
