use thiserror::Error;

/// Errors raised by the library. Audits never error; they report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("system is not transitive")]
    NotTransitive,
    #[error("system is not mixing (period {0})")]
    NotMixing(usize),
    #[error("word is not admissible at position {0}")]
    NotAdmissible(usize),
    #[error("pseudo-orbit jump at index {index} exceeds delta (distance {distance})")]
    PseudoOrbitGap { index: usize, distance: f64 },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("nesting violation: {0}")]
    Nesting(String),
    #[error("open set misses every level: {0}")]
    Density(String),
    #[error("construction failed in band {band}: {msg}")]
    Construction { band: usize, msg: String },
    #[error("approximation failed: best achievable distance {distance}, entropy gap {entropy_gap}")]
    Approximation { distance: f64, entropy_gap: f64 },
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
