use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QfimError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("partition ({row_split}, {col_split}) does not fit a {rows}x{cols} matrix")]
    PartitionOutOfRange {
        row_split: usize,
        col_split: usize,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is singular to working precision (1-norm condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    /// Basis kets are linearly dependent to tolerance: the parameters sit at a
    /// critical point and the caller has to supply a reduced basis.
    #[error(
        "basis is rank deficient: kets {indices:?} are linearly dependent \
         (smallest relative singular value {smallest_sigma:e})"
    )]
    RankDeficient {
        indices: Vec<usize>,
        smallest_sigma: f64,
    },

    #[error("invalid state model: {0}")]
    InvalidModel(String),

    #[error("generators {first} and {second} do not commute (max |[K, K']| = {deviation:e})")]
    NonCommutingGenerators {
        first: usize,
        second: usize,
        deviation: f64,
    },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

pub type Result<T> = std::result::Result<T, QfimError>;
