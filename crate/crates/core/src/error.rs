use thiserror::Error;

/// Errors produced by the solver crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("CFL violation: cell value {value} outside [0,1] at cell {cell} (reduce cfl)")]
    CflViolation { cell: usize, value: f64 },

    #[error("separatrix left the computational domain at t = {time} (domain too small)")]
    DomainExit { time: f64 },

    #[error("profile ODE denominator vanished at z = {z} (non-admissible input?)")]
    Singularity { z: f64 },

    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last residual {last_residual:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        last_residual: f64,
        residual_history: Vec<f64>,
    },

    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
