use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("parameter point outside domain: {0}")]
    Domain(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("state vanishes identically")]
    ZeroState,

    #[error("normalization violated (defect {defect:.3e}): {context}")]
    Normalization { defect: f64, context: String },

    #[error("alpha = {0} is excluded, |alpha| must be < 1")]
    ExcludedAlpha(f64),

    #[error("dense dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("exceptional point: {0}")]
    ExceptionalPoint(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("generators do not commute (commutator norm {0:.3e})")]
    NonCommuting(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("stalled at a local minimum: {0}")]
    LocalMinimum(String),
}

impl GeomError {
    /// Stable machine-readable code used by the CLI error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            GeomError::Domain(_) => "DOMAIN",
            GeomError::NonFinite(_) => "NON_FINITE",
            GeomError::Shape(_) => "SHAPE_MISMATCH",
            GeomError::ZeroState => "ZERO_STATE",
            GeomError::Normalization { .. } => "NORMALIZATION_VIOLATION",
            GeomError::ExcludedAlpha(_) => "EXCLUDED_ALPHA",
            GeomError::DimensionCap { .. } => "DIMENSION_CAP",
            GeomError::ExceptionalPoint(_) => "EXCEPTIONAL_POINT",
            GeomError::Singular(_) => "SINGULAR",
            GeomError::NonCommuting(_) => "NON_COMMUTING",
            GeomError::Unsupported(_) => "UNSUPPORTED",
            GeomError::Overflow(_) => "OVERFLOW",
            GeomError::LocalMinimum(_) => "LOCAL_MINIMUM",
        }
    }
}
