use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid cross-section: {0}")]
    InvalidCrossSection(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degree k={k} out of range 0..{n}")]
    DegreeOutOfRange { k: usize, n: usize },
    #[error("experimental-unsupported: {0}")]
    ExperimentalUnsupported(String),
    #[error("order {requested} exceeds configured maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("s = {s} is a pole; request the finite part instead")]
    Pole { s: f64 },
    #[error("cutoff insufficient: tail bound {tail:e} exceeds tolerance {tol:e}; need cutoff ≥ {required:.6e}")]
    CutoffInsufficient { tail: f64, tol: f64, required: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("oracle too large: {0}")]
    OracleTooLarge(String),
    #[error("stiffness: {0}")]
    Stiff(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
