use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("argument outside the domain of definition: {0}")]
    Domain(String),

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("quadrature did not converge (partial estimate {estimate:e}, error {abs_error:e})")]
    Quadrature { estimate: f64, abs_error: f64 },

    #[error("point {0:?} lies outside the domain")]
    OutsideDomain(Vec<f64>),

    #[error("jump kernel is negative: {0}")]
    KernelNegativity(String),

    #[error("no corkscrew point with kappa above {kappa_min}")]
    Fatness { kappa_min: f64 },

    #[error("walk did not leave the domain after {steps} steps (last position {position:?})")]
    NonTermination { steps: usize, position: Vec<f64> },

    #[error("path exceeded its budget of {steps} time steps")]
    Truncation { steps: usize },

    #[error("{failed} of {total} paths failed to terminate")]
    TooManyFailures { failed: usize, total: usize },

    #[error("degenerate estimate: {0}")]
    Degenerate(String),

    #[error("not supported: {0}")]
    Unsupported(String),
}
