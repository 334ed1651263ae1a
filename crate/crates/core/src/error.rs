use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested tolerance is below what binary64 sums can deliver.
    #[error("tolerance {tol:e} unreachable (smallest supported is {min:e})")]
    ToleranceUnreachable { tol: f64, min: f64 },

    #[error("series needs {needed} terms but max_terms is {max_terms}")]
    Truncation { needed: u64, max_terms: u64 },

    /// No sign change was found; `scan` holds the sampled `(x, f(x))` pairs.
    #[error("root not bracketed on [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64, scan: Vec<(f64, f64)> },

    #[error("root solver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("threshold scan exceeded cap n = {cap}")]
    ThresholdUnreachable { cap: u64 },

    /// Eigenvalue `l` of the interpolation matrix is too small to invert.
    #[error("eigenvalue l = {l} nearly singular (relative size {magnitude:e})")]
    Conditioning { l: usize, magnitude: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("oracle failure: {0}")]
    Oracle(String),
}
