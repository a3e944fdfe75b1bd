use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value {value} while evaluating {what} at x = {x}")]
    NonFinite { what: &'static str, x: f64, value: f64 },

    #[error("quadrature on [{a}, {b}] did not converge within {budget} bisections")]
    Convergence { a: f64, b: f64, budget: u32 },

    #[error("target {target} outside the range [{low}, {high}]")]
    OutOfRange { target: f64, low: f64, high: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate regime: {0}")]
    DegenerateRegime(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("assembly failed on element {element}: {reason}")]
    Assembly { element: usize, reason: String },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("need at least {required} points, got {got}")]
    Size { required: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(what: &'static str, x: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, x, value })
    }
}
