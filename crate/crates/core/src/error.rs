use thiserror::Error;

/// Errors produced by the ring solvers and experiment runners.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "eigensolver did not converge after {iterations} QR iterations (active block {lo}..={hi})"
    )]
    SolverFailure {
        iterations: usize,
        lo: usize,
        hi: usize,
    },

    #[error("eigenpair {index} residual {residual:e} exceeds {bound:e}")]
    Residual {
        index: usize,
        residual: f64,
        bound: f64,
    },

    #[error("bisection bracket invalid: predicate is {at_low} at {low} and {at_high} at {high}")]
    BracketInvalid {
        low: f64,
        high: f64,
        at_low: bool,
        at_high: bool,
    },

    #[error(
        "boundary mass {fraction:.3e} exceeds guard {guard:.1e} at tau = {tau}; \
         widen the mode window (current [{n_min}, {n_max}])"
    )]
    BoundaryMassExceeded {
        tau: f64,
        fraction: f64,
        guard: f64,
        n_min: i64,
        n_max: i64,
    },

    #[error("step size underflow at tau = {tau} (h = {step:e})")]
    StepUnderflow { tau: f64, step: f64 },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure { .. }
                | Error::Residual { .. }
                | Error::BoundaryMassExceeded { .. }
                | Error::StepUnderflow { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
