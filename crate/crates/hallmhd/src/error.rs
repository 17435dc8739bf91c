//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: ({0}-D, n={1}) vs ({2}-D, n={3})")]
    GridMismatch(usize, usize, usize, usize),
    #[error("fractional order must be nonnegative, got s = {0}")]
    NegativeOrder(f64),
    #[error("Lp exponent must satisfy p >= 1, got p = {0}")]
    InvalidExponent(f64),
    #[error("invalid product padding {0}: need a rational >= 1 with an even padded grid")]
    InvalidPadding(f64),
    #[error("band limit {k} violates the alias-free quadrature condition 3K < n (n = {n})")]
    BandLimitTooLarge { k: usize, n: usize },
    #[error("field has no band limit; alias-free quadrature requires one")]
    MissingBandLimit,
    #[error("state dimension {state}-D does not match the system's {system}-D setting")]
    DimensionMismatch { state: usize, system: usize },
    #[error("invalid system parameters: {0}")]
    InvalidSystem(String),
    #[error("operation requires nu = eta = epsilon = 1 on the classical system")]
    ParamsNotUnit,
    #[error("field is not divergence-free: |div|_2 = {0:.3e}")]
    NonSolenoidal(f64),
    #[error("invalid criterion: {0}")]
    InvalidCriterion(String),
    #[error("samples are not monotone in time: prev t = {prev}, cur t = {cur}")]
    NonMonotoneTime { prev: f64, cur: f64 },
    #[error("non-finite field values detected (blow-up) at t = {0}")]
    Blowup(f64),
    #[error("invalid stepper configuration: {0}")]
    InvalidStepper(String),
}

pub type Result<T> = std::result::Result<T, Error>;
