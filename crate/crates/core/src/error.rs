use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("map is not completely positive (min Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCp { min_eigenvalue: f64 },
    #[error("map is not trace preserving (deviation {deviation:.3e})")]
    NotTp { deviation: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("channels are not equivalent (Choi distance {distance:.3e})")]
    NotEquivalent { distance: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("compatibility methods disagree: {0}")]
    MethodDisagreement(String),
    #[error("zero marginal probability P(X={outcome})")]
    ZeroMarginal { outcome: usize },
    #[error("outcome index {index} out of range (alphabet size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("invalid probability table: {0}")]
    InvalidTable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
