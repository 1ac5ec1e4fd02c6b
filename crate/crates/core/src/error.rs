use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature budget of {evaluations} evaluations exceeded (best estimate {estimate:e}, error bound {abs_error_bound:e})")]
    BudgetExceeded {
        estimate: f64,
        abs_error_bound: f64,
        evaluations: usize,
    },

    /// The conditioning event is too rare for plain rejection sampling.
    #[error("crossing probability {probability:e} is below {threshold:e}; use the tilted sampler")]
    RareEvent { probability: f64, threshold: f64 },

    #[error("underflow: {0}")]
    Underflow(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// No simulated path reached the barrier, so no conditional estimate exists.
    #[error("no path crossed the barrier out of {attempted} simulated")]
    NoCrossings { attempted: u64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

pub(crate) fn ensure_positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::Domain(format!(
            "{name} must be finite and > 0, got {x}"
        )))
    }
}
