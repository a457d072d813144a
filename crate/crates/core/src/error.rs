use alloc::string::String;

/// Errors raised by the estimation toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("scrambling entry {index} has modulus {modulus}, expected 1")]
    NonUnitScrambling { index: usize, modulus: f64 },
    #[error("mixing matrix is not unitary (max deviation {0:e})")]
    NonUnitaryMixing(f64),
    #[error("covariance is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("covariance is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("pilot Gram matrix is singular; least-squares channel estimation needs n >= l_t")]
    SingularPilot,
    #[error("pilot is not orthogonal (max deviation of S^H S from (n rho / l_t) I is {0:e})")]
    NonOrthogonalPilot(f64),
    #[error("pilot layout {0} is required for this operation")]
    WrongLayout(&'static str),
    #[error("no frequency information: every correlation lag is structurally silent")]
    NoFrequencyInformation,
    #[error("a flat (zero precision) CFO prior cannot be sampled")]
    FlatPrior,
    #[error("correlation sequence has not been unwrapped")]
    NotUnwrapped,
    #[error("degenerate prior: variance must be positive")]
    DegeneratePrior,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn dimension(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
