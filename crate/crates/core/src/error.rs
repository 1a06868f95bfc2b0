use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the operator library.
#[derive(Debug, Error)]
pub enum HardyError {
    #[error("point {point} lies outside the open unit disk")]
    Domain { point: Complex64 },

    #[error("invalid kernel specification: {0}")]
    InvalidSpec(String),

    #[error("singular symbol: {0}")]
    SingularSymbol(String),

    #[error("boundary grid of {samples} samples aliases order {order} (need at least {required})")]
    Aliasing {
        samples: usize,
        order: usize,
        required: usize,
    },

    #[error("log of non-positive boundary sample {value} at index {index}")]
    LogDomain { index: usize, value: Complex64 },

    #[error("symbol has zeros in the closed disk (min |f| = {min_modulus:.3e}, winding number {winding})")]
    SymbolHasZeros { min_modulus: f64, winding: i64 },

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("trajectory left the disk at t = {time} (z = {point})")]
    DiskExit { time: f64, point: Complex64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("composition leaves the disk: |phi({point})| = {modulus}")]
    CompositionOutOfDisk { point: Complex64, modulus: f64 },

    #[error(
        "eigenvalue iteration did not converge for {size}x{size} matrix \
         (frobenius norm {frobenius:.3e}, max column/min column norm ratio {column_ratio:.3e})"
    )]
    EigenNonConvergence {
        size: usize,
        frobenius: f64,
        column_ratio: f64,
    },

    #[error("gram matrix is numerically singular (min eigenvalue {min_eigenvalue:.3e}, max {max_eigenvalue:.3e}); use a positive ridge")]
    IllConditioned {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("trajectory csv row {row}: {reason}")]
    TrajectoryCsv { row: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = HardyError> = std::result::Result<T, E>;
