use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("interval [{t1}, {t2}] lies outside the trajectory horizon [0, {horizon}]")]
    OutOfRange { t1: f64, t2: f64, horizon: f64 },

    #[error("degenerate record: the coherence vector vanished")]
    DegenerateRecord,

    #[error("alpha is undefined: {0}")]
    AlphaUndefined(&'static str),

    #[error("candidate angles are degenerate (c1 = 0)")]
    DegenerateCandidates,

    #[error("scenario difference never crossed zero before tau = {tau_max}")]
    NoCrossing { tau_max: f64 },

    #[error("clustering failed: {0}")]
    Clustering(String),

    #[error("eigenvalues have equal modulus; no unique stable eigenstate")]
    DegenerateEigenvalues,

    #[error("singular angle {0}")]
    SingularAngle(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("rate fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("{n} steps exceeds the enumeration cap of {cap}")]
    TooManySteps { n: usize, cap: usize },
}
