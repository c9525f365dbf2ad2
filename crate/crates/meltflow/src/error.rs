//! Error types shared by all solver modules.

use thiserror::Error;

/// A single configuration violation with the offending key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigViolation {
    /// Dotted key path (e.g. `materials.liquid.mu`) or `line N` for parse errors.
    pub key: String,
    /// Human-readable description of the violation.
    pub message: String,
}

impl std::fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration. Carries the full list of violations, not just the first.
    #[error("configuration error:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigViolation>),

    /// A time step violated an explicit stability bound.
    #[error("step-size error: {0}")]
    StepSize(String),

    /// An iterative linear solve did not reach its residual contract.
    #[error("solver failure in {context}: residual {residual:.3e} after {iterations} iterations (target {target:.3e})")]
    Solver {
        context: &'static str,
        residual: f64,
        target: f64,
        iterations: usize,
    },

    /// A point fell outside the grid extent.
    #[error("domain error: point ({0:.6e}, {1:.6e}) outside grid extent")]
    OutsideDomain(f64, f64),

    /// Isocontour projection could not bracket the target along the normal ray.
    #[error("projection error: no bracket for target within +/-6 epsilon from ({0:.6e}, {1:.6e})")]
    Projection(f64, f64),

    /// An analytical oracle failed to converge.
    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Single-violation configuration error.
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config(vec![ConfigViolation {
            key: key.into(),
            message: message.into(),
        }])
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
