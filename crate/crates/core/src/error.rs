use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coin angle {0} outside the allowed range {1}")]
    Domain(f64, &'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid initial-condition spec: {0}")]
    InvalidSpec(String),

    #[error("window of {requested} sites exceeds the configured maximum of {max}")]
    Resource { requested: usize, max: usize },

    #[error("ring of {n} sites too small: at least {required} are needed")]
    Size { n: usize, required: usize },

    #[error("degenerate eigenspinor at k={k}: unnormalized norm {norm:e}")]
    Degenerate { k: f64, norm: f64 },

    #[error("envelope leaks through the grid boundary: edge amplitude {0:e}")]
    BoundaryLeak(f64),

    #[error("coin part of the state is not uniform across sites")]
    NonUniformCoin,

    #[error("distribution is empty")]
    EmptyDistribution,

    #[error("flatness window [{lo}, {hi}] exceeds distribution support [{x_min}, {x_max}]")]
    WindowExceedsSupport { lo: i64, hi: i64, x_min: i64, x_max: i64 },

    #[error("prediction at t={t} is still inside the transient (t < {threshold})")]
    Transient { t: f64, threshold: f64 },

    #[error("packets are not separable: {0}")]
    NotSeparable(String),
}
