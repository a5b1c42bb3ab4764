use thiserror::Error;

/// Everything that can go wrong while building or probing a model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point} lies outside the domain of chart {chart}")]
    Domain { chart: usize, point: String },
    #[error("numerical failure: {0}")]
    Numerics(String),
    #[error("curvature is not positive at {at}: eigenvalue {eigenvalue:e}")]
    Positivity { at: String, eigenvalue: f64 },
    #[error("quadrature resolution {got} is too low, use at least {min}")]
    Resolution { got: usize, min: usize },
    #[error("Gram matrix condition number {condition:.3e} exceeds cap {cap:.1e}; use the closed-form Gram path")]
    IllConditioned { condition: f64, cap: f64 },
    #[error("Gram matrix is numerically rank deficient; directions {0:?} would have to be discarded")]
    Rank(Vec<usize>),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("fit failure: {0}")]
    Fit(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("kernel magnitude {0:e} is below the underflow floor; reduce the separation or k")]
    Underflow(f64),
    #[error("base point: every section vanishes at {0}")]
    BasePoint(String),
    #[error("pole: {0} is the singular point of the metric")]
    Pole(String),
    #[error("no test section survived the holomorphy filter")]
    Generator,
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
