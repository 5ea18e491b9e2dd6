use thiserror::Error;

/// Errors raised by geometry, estimation and detection routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tangent vector is based at a different point")]
    BaseMismatch,

    #[error("geodesic left the coordinate domain: {0}")]
    LeftDomain(String),

    #[error("matrix is not positive definite (recursion failed at order {order})")]
    NotPositiveDefinite { order: usize },

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("invalid ball context: {0}")]
    Context(String),

    #[error("iterate {iteration} left the ball: distance {distance} > radius {radius}")]
    EscapedBall {
        iteration: usize,
        distance: f64,
        radius: f64,
    },

    #[error("step schedule exhausted after {0} steps")]
    ScheduleExhausted(usize),

    #[error("sampler exhausted after {0} draws")]
    SamplerExhausted(usize),

    #[error("search budget exceeded: {0}")]
    Budget(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bound not certified: {0}")]
    NotCertified(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
