use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("total momentum k = {k} is below the lowest transverse threshold q_0 = {q0}")]
    BelowThreshold { k: f64, q0: f64 },

    #[error("total momentum k = {k} lies within the guard band of threshold q_{n} = {qn}")]
    AtThreshold { k: f64, n: usize, qn: f64 },

    #[error("mode set has {available} modes but channel index {needed} is required")]
    NotEnoughModes { needed: usize, available: usize },

    #[error("transverse eigen-solver failed for mode {mode}: {reason}")]
    EigenNonConvergence { mode: usize, reason: String },

    #[error("radial integration did not converge (l = {l}, k = {k}): {reason}")]
    RadialNonConvergence { l: usize, k: f64, reason: String },

    #[error("coupling P_{l}{s} requested with l + s odd")]
    ParityViolation { l: usize, s: usize },

    #[error("T-matrix system is singular (condition number {condition:e}); a pole of the amplitude sits at this momentum")]
    SingularSystem { condition: f64 },

    #[error("no quartic root satisfies the bound-state equation at s = {s}")]
    NoValidRoot { s: f64 },

    #[error("pole search did not converge after {iterations} iterations (last k0 = {re} + {im}i)")]
    PoleNonConvergence { iterations: usize, re: f64, im: f64 },

    #[error("pole found at k0 = {re} + {im}i lies in the lower half plane and is not a bound state")]
    PoleNotBound { re: f64, im: f64 },

    #[error("no pole candidate: {0}")]
    NoPole(String),

    #[error("phase shift for l = {l} at k = {k} unavailable: {reason}")]
    PhaseShiftUnavailable { l: usize, k: f64, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
