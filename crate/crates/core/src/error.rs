use thiserror::Error;

/// Errors raised by the numerical and counting routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: precondition violated: {detail}")]
    Precondition { op: &'static str, detail: String },

    #[error("generic sampler exhausted {attempts} draws for seed {seed}")]
    SamplerExhausted { seed: u64, attempts: u32 },

    #[error("grid of {points} points exceeds the allocation limit")]
    GridTooLarge { points: usize },

    #[error("search radius {radius} contains fewer than two independent vectors")]
    RadiusTooSmall { radius: f64 },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("2-adic solvability search for ({a}, {b}, {c}) did not resolve within {nodes} nodes")]
    TwoAdicUnresolved { a: i64, b: i64, c: i64, nodes: usize },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("degenerate regression: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Precondition {
        op,
        detail: detail.into(),
    }
}
