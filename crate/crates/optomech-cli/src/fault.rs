//! Failure classification and process exit codes.
//!
//! Every failure a run can hit falls into one of three buckets: the
//! configuration was unusable, the configured physics is outside the
//! model's domain (unstable lattice, heating detuning), or the numerics
//! broke down. Each bucket owns a distinct exit code so scripted callers
//! can branch without parsing messages.

use std::fmt;

/// One run failure, classified for the exit status.
#[derive(Debug)]
pub enum Fault {
    /// Unusable input: schema violations, bad field values, missing
    /// sections, file I/O problems. Exit code 2.
    Config(String),
    /// A well-formed configuration the physics rejects. Exit code 3.
    Physics(optomech::Error),
    /// Numerical machinery failed on an otherwise admissible problem.
    /// Exit code 4.
    Numeric(optomech::Error),
}

impl Fault {
    /// Process exit status for this failure class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Fault::Config(_) => 2,
            Fault::Physics(_) => 3,
            Fault::Numeric(_) => 4,
        }
    }

    /// Classifies a library error: domain rejections are physics faults,
    /// factorization/residue/divergence failures are numeric, everything
    /// else traces back to the configuration values.
    pub fn from_lib(err: optomech::Error) -> Fault {
        use optomech::Error::*;
        match err {
            NegativeTemperature { .. }
            | MechanicalInstability { .. }
            | LambDickeViolation { .. } => Fault::Physics(err),
            ImaginaryResidue { .. }
            | NoiseFactorization { .. }
            | IntegrationFailure { .. } => Fault::Numeric(err),
            _ => Fault::Config(err.to_string()),
        }
    }

    /// Wraps a file-system error with the path it concerns.
    pub fn io(context: &std::path::Path, err: std::io::Error) -> Fault {
        Fault::Config(format!("{}: {err}", context.display()))
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fault::Config(msg) => write!(f, "config error: {msg}"),
            Fault::Physics(err) => write!(f, "physics domain error: {err}"),
            Fault::Numeric(err) => write!(f, "numeric failure: {err}"),
        }
    }
}

/// Result alias for CLI operations.
pub type CliResult<T> = Result<T, Fault>;
