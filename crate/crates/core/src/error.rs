use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad ring description: {0}")]
    BadRingDescription(String),

    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("dimension or ring mismatch: {0}")]
    Mismatch(String),

    #[error("matrix is not invertible (determinant is not a unit)")]
    NotInvertible,

    #[error("invalid index: {0}")]
    BadIndex(String),

    #[error("column is not isotropic: {0}")]
    NotIsotropic(String),

    #[error("not a group member: {0}")]
    NotMember(String),

    #[error("extra short root parameter outside the required form parameter mirror")]
    ParamOutsideDelta,

    #[error("no completion b with (a,b) in the required form parameter mirror")]
    NoCompletion,

    #[error("generator outside Delta_max")]
    GeneratorOutsideDeltaMax,

    #[error("ideal is not involution invariant: {0}")]
    NotInvolutionInvariant(String),

    #[error("invalid odd form ideal: {0}")]
    InvalidFormIdeal(String),

    #[error("monomial relocation search exhausted (internal)")]
    RelocationExhausted,

    #[error("internal construction check failed: {0}")]
    ConstructionCheck(String),

    #[error("certificate verification failed: {0}")]
    Verification(String),

    #[error("malformed certificate: {0}")]
    Malformed(String),

    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
