use thiserror::Error;

/// Failures reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("small denominator {value:.3e} at mode {mode}, component {component}")]
    SmallDenominator { mode: String, component: String, value: f64 },
    #[error("constant part is parabolic: |2 sin xi| = {0:.3e}")]
    ParabolicConstant(f64),
    #[error("fixed-point iteration did not converge: low-mode norms {0:?}")]
    FixedPoint(Vec<f64>),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
