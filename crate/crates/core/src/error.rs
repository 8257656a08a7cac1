use thiserror::Error;

pub type Result<T> = std::result::Result<T, CartanError>;

#[derive(Debug, Error)]
pub enum CartanError {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("duplicate coefficient for sorted multi-index {0:?}")]
    DuplicateIndex(Vec<usize>),

    #[error("multi-index {index:?} has length {len}, expected rank {rank}")]
    IndexLength { index: Vec<usize>, len: usize, rank: usize },

    #[error("rank {0} is too small, m >= 3 is required")]
    RankTooSmall(usize),

    #[error("dimension {dim} is too small, at least {min} is required")]
    DimTooSmall { dim: usize, min: usize },

    #[error("{what} = {value} exceeds the supported maximum {max}")]
    CapExceeded { what: &'static str, value: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contraction order {k} exceeds tensor rank {rank}")]
    ContractionOrder { k: usize, rank: usize },

    #[error("non-positive radicand {0:e}: momentum lies outside the admissible domain")]
    NonPositiveRadicand(f64),

    #[error("a^ij is singular at this point (reciprocal condition estimate {0:e})")]
    SingularAij(f64),

    #[error("the angular basis tensor h^hj h^ik - h^hk h^ij vanishes identically")]
    DegenerateBasis,

    #[error("inadmissible point: {0}")]
    InadmissiblePoint(String),

    #[error("finite-difference stencil left the admissible domain along p_{axis}")]
    InadmissiblePerturbation { axis: usize },

    #[error("dense expansion needs {entries} entries, above the guard of {max}")]
    TooLarge { entries: u128, max: u128 },

    #[error("no admissible point found after {0} attempts")]
    NoAdmissiblePoint(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
