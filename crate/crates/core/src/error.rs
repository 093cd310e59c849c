use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("gate is not unitary: residual {0:.3e}")]
    NotUnitary(f64),

    #[error("eigenvalue {value:.3e} lies below the clip threshold -{clip:.3e}")]
    NegativeSpectrum { value: f64, clip: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:.3e}); spectral gap missing?")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("size guard: {what} needs {required} but the limit is {limit}")]
    SizeGuard {
        what: &'static str,
        required: usize,
        limit: usize,
    },

    #[error("invalid site set: {0}")]
    Sites(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gate {0} is not a Clifford gate")]
    NotClifford(usize),

    #[error("transfer-matrix power is not rank one: residual {residual:.3e} exceeds {tol:.3e}")]
    NotRankOne { residual: f64, tol: f64 },

    #[error("fixed points are not normalisable: <l|r> = {0:.3e}")]
    DegenerateFixedPoints(f64),

    #[error(
        "MPS is not injective (leading transfer eigenvalue degenerate, |second|/|first| = {ratio:.6}); \
         the relation 2E = I(1/2) does not apply: E = {negativity:.6}, I(1/2) = {mutual_info:.6}"
    )]
    NonInjective {
        ratio: f64,
        negativity: f64,
        mutual_info: f64,
    },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("non-integral decomposition: {what} = {value:.9}")]
    NonIntegral { what: &'static str, value: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
