use thiserror::Error;

/// Errors raised by the max-plus IFS machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("positive-weight cycle through point {node} (closure diagonal {weight})")]
    PositiveCycle { node: usize, weight: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty point set")]
    EmptySet,

    #[error("density has empty support (all entries are -inf)")]
    EmptySupport,

    #[error("index {index} out of range for {len} points")]
    Index { index: usize, len: usize },

    #[error("system is not contractive: gamma_hat = {gamma_hat}")]
    NotContractive { gamma_hat: f64 },

    #[error("weights not normalized at point {point}: max_j q_j = {max}")]
    Normalization { point: usize, max: String },

    #[error("Aubry set is empty at tolerance {tol_aubry}")]
    EmptyAubry { tol_aubry: f64 },

    #[error("weights depend on the point: map {map} varies by {spread}")]
    NotConstantWeight { map: usize, spread: f64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("no convergence after {iterations} iterations (last step {last_step})")]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error("demonstration failed: {0}")]
    Demonstration(String),

    #[error("could not generate a valid system after {attempts} attempts: {last}")]
    Generation { attempts: usize, last: String },
}

pub type Result<T> = std::result::Result<T, Error>;
