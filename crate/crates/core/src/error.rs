use thiserror::Error;

/// Errors shared by all simulation and verification modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("time {t} outside schedule range [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    #[error("transverse amplitude {0:.3e} is too small to define a rotation frequency")]
    UndefinedFrequency(f64),

    #[error("scaling fit undefined: {0}")]
    FitUndefined(String),

    #[error("unsupported operator support (k = {0}): {1}")]
    UnsupportedSupport(usize, String),

    #[error("initial states are too close (trace distance {0:.3e}) to track a distance ratio")]
    DegeneratePair(f64),

    #[error("a {qubits}-qubit state vector needs ~{megabytes} MB; cap is {cap} qubits")]
    StateTooLarge {
        qubits: usize,
        megabytes: usize,
        cap: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
