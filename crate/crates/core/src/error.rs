use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("device {device} cannot reach its throughput target with energy {energy} J (needs more than {required} J)")]
    InfeasibleEnergy {
        device: usize,
        energy: f64,
        required: f64,
    },

    #[error("problem is infeasible (phase-I max slack {max_slack})")]
    Infeasible { max_slack: f64 },

    #[error("decode slot {slot} exceeds device order position {position}")]
    SlotOrderViolation { slot: usize, position: usize },

    #[error("internal solver error: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
