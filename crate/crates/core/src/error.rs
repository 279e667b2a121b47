use thiserror::Error;

/// Errors raised by the analytic evaluators and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of the gamma function at x = {0}")]
    Pole(f64),

    #[error("series failed to converge: {0}")]
    NoConvergence(String),

    #[error("quadrature failed to reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("enumeration size {requested} exceeds the guard {limit}")]
    SizeGuard { requested: usize, limit: usize },

    #[error("no split with delta >= 1 exists for n_t = {n_t}, n_r = {n_r}")]
    Infeasible { n_t: usize, n_r: usize },

    #[error("rate integral truncation budget exceeded: {0}")]
    Truncation(String),

    #[error("quantile bracket failure: {0}")]
    Bracket(String),

    #[error("degenerate realization: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
