use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected {rows}x{cols} = {} entries, got {got}", rows * cols)]
    EntryCount {
        rows: usize,
        cols: usize,
        got: usize,
    },

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("module mismatch: {0}")]
    ModuleMismatch(String),

    #[error("tolerance {name} must be finite and non-negative, got {value}")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("map does not preserve adjoints (defect {defect:e})")]
    NotHermitianPreserving { defect: f64 },

    #[error("map is not completely positive (minimum Choi eigenvalue {min_eigenvalue:e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("invalid Kraus rank {r}: must satisfy 1 <= r <= {max}")]
    InvalidRank { r: usize, max: usize },

    #[error("dimension too small: {0}")]
    DimensionTooSmall(String),

    #[error("representation is not minimal: {0}")]
    NotMinimal(String),

    #[error("not a phi-map: {0}")]
    NotAPhiMap(String),

    #[error("representations are not equivalent: {0}")]
    NotEquivalent(String),

    #[error("ill-conditioned Gram matrix: {0}")]
    IllConditioned(String),
}
