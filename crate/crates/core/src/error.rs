use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (max |M + M^T| entry {0})")]
    NonSkewInput(f64),
    #[error("heading undefined: body forward axis within tolerance of +/- vertical")]
    DegenerateHeading,
    #[error("matrix is not within tolerance of a rotation (Frobenius distance {0})")]
    NotNearRotation(f64),
    #[error("thrust magnitude too close to zero for flatness inversion")]
    ZeroThrustSingularity,
    #[error("attitude too close to flip-over: heading-projection denominator vanishes")]
    FlipOverSingularity,
    #[error("desired force vanishes; desired attitude undefined")]
    ZeroForceSingularity,
    #[error("pole set is not closed under conjugation")]
    NonConjugateClosure,
    #[error("pole set has wrong length: expected {expected}, got {got}")]
    WrongOrder { expected: usize, got: usize },
    #[error("agent {0} is not a leader")]
    NotALeader(usize),
    #[error("follower {follower} missing position of in-neighbor {neighbor}")]
    MissingNeighbor { follower: usize, neighbor: usize },
    #[error("log contains no rows")]
    EmptyLog,
    #[error("argument {value} outside domain [{min}, {max}]")]
    OutOfDomain { value: f64, min: f64, max: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
