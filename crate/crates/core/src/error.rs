use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ket norm {norm} deviates from 1")]
    NonUnitNorm { norm: f64 },
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("phase table does not define an orthonormal unbiased basis (residual {residual:.3e})")]
    NotUnbiasedBasis { residual: f64 },
    #[error("Kraus operators are not trace preserving (residual {residual:.3e})")]
    NotCptp { residual: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("total dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("invalid party order: {0}")]
    InvalidOrder(String),
    #[error("invalid cut {cut} for a state with {parties} factors")]
    InvalidCut { cut: usize, parties: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonUnitNorm { .. } => "NonUnitNorm",
            Error::InvalidDims(_) => "InvalidDims",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotDensityMatrix(_) => "NotDensityMatrix",
            Error::NotUnbiasedBasis { .. } => "NotUnbiasedBasis",
            Error::NotCptp { .. } => "NotCPTP",
            Error::InvalidParameters(_) => "InvalidParameters",
            Error::UnsupportedDimension(_) => "UnsupportedDimension",
            Error::DimensionCap { .. } => "DimensionCap",
            Error::InvalidOrder(_) => "InvalidOrder",
            Error::InvalidCut { .. } => "InvalidCut",
            Error::Parse(_) => "ParseError",
            Error::Validation(_) => "ValidationError",
            Error::Io(_) => "IoError",
        }
    }
}
