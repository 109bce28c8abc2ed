use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at {at}")]
    Pole { at: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// No vertical line separates the left and right pole families.
    #[error("no valid contour for variable {variable}: strip ({lo}, {hi}) is empty")]
    NoValidContour { variable: usize, lo: f64, hi: f64 },

    #[error("quadrature did not converge after {refinements} refinements (last delta {delta:e})")]
    NotConverged { refinements: usize, delta: f64 },

    #[error("evaluation budget exceeded: {needed} nodes > {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    /// Two independent evaluation paths of the same metric disagree.
    #[error("{metric}: primary {primary:e} and cross-check {secondary:e} disagree")]
    CrossCheck { metric: String, primary: f64, secondary: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
