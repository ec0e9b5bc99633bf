use thiserror::Error;

/// Errors raised by the algebra, grid and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solvability error: component {component} has mean {mean:e}")]
    Solvability { component: String, mean: f64 },

    #[error("iteration error: {0}")]
    Iteration(String),

    #[error("iteration diverged after {iterations} steps (|dq|_L4 = {dq_l4:.4e}, last ratio {last_ratio:.4})")]
    Divergence {
        iterations: usize,
        dq_l4: f64,
        last_ratio: f64,
    },

    #[error("bandwidth {bandwidth} exceeds cap {cap} for grid N = {n}")]
    Bandwidth { bandwidth: usize, cap: usize, n: usize },

    #[error("operator size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown command '{0}'")]
    UnknownCommand(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
