use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible operands: {0}")]
    IncompatibleOperands(String),

    /// An explicit Cayley table failed one of the group axioms.
    #[error("group axiom violated ({axiom}): {detail}")]
    GroupAxiom { axiom: &'static str, detail: String },

    #[error("group spec syntax error: {0}")]
    Syntax(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The integrator produced a NaN or infinity.
    #[error("integration diverged at step {step} (t = {t})")]
    Divergence { step: usize, t: f64 },

    #[error("unsupported field mode: {0}")]
    UnsupportedMode(String),

    #[error("hyperplane witness undefined: {0}")]
    WitnessUndefined(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
