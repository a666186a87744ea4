use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid Renyi order {0}")]
    InvalidOrder(f64),

    #[error("order {alpha} is outside the {expected} regime")]
    WrongRegime { alpha: f64, expected: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("power {0} of a singular operator is undefined")]
    SingularPower(f64),

    #[error("support of rho is not contained in the support of sigma")]
    SupportViolation,

    #[error("map is not trace preserving")]
    NotTracePreserving,

    #[error("unknown channel '{0}'")]
    UnknownChannel(String),

    #[error("product input dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("every restart hit the infeasibility barrier")]
    InfeasibleObjective,

    #[error("empty optimizer set")]
    EmptyOptimizerSet,
}

pub type Result<T> = std::result::Result<T, Error>;
