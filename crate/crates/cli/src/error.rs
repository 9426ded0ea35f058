use std::fmt;

use ata_core::AtaError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Io,
    Validation,
    Infeasible,
    Numerical,
}

/// Error with the pipeline stage that raised it.
#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    fn new(kind: Kind, stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            stage,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(Kind::Validation, "parse", message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(Kind::Validation, "validate", message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(Kind::Io, "io", message)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(Kind::Numerical, "engine", message)
    }

    pub fn from_core(e: AtaError) -> Self {
        let kind = match e {
            AtaError::InfeasiblePlan(_) => Kind::Infeasible,
            AtaError::Numerical(_) => Kind::Numerical,
            _ => Kind::Validation,
        };
        Self::new(kind, "core", e.to_string())
    }

    /// Tags a core error with the stage it came from.
    pub fn at(stage: &'static str) -> impl Fn(AtaError) -> Self {
        move |e| Self {
            stage,
            ..Self::from_core(e)
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Io => 1,
            Kind::Validation => 2,
            Kind::Infeasible => 3,
            Kind::Numerical => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}
