use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not Hermitian (defect {defect:e} exceeds {tolerance:e})")]
    NonHermitianInput { defect: f64, tolerance: f64 },
    #[error("eigensolver failed to converge")]
    ConvergenceFailure,
    #[error("occupation {n_occ} out of range for dimension {dim}")]
    InvalidOccupation { n_occ: usize, dim: usize },
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("Fisher information came out negative ({0:e}); derivative is broken")]
    NegativeResult(f64),
    #[error("every probability is below the cutoff")]
    DegenerateDistribution,
    #[error("state selection jumped branch (overlap {overlap:.3e})")]
    StateCrossing { overlap: f64 },
    #[error("|z| = {0} is not inside the unit disc")]
    InvalidZ(f64),
    #[error("r = {0} outside [0, 1)")]
    InvalidR(f64),
    #[error("lambda = {0} is outside the topological phase")]
    OutsideTopologicalPhase(f64),
    #[error("edge state selection is ambiguous")]
    NoGapIsolation,
    #[error("spectrum has no negative eigenvalue")]
    NoLowerBand,
    #[error("site probabilities are not decaying")]
    NonMonotonic,
    #[error("matrix is not a projector (defect {0:e})")]
    NotAProjector(f64),
    #[error("every momentum on the grid is gapless")]
    AllExcluded,
    #[error("L = {0} must be even")]
    OddL(usize),
    #[error("continuum limit diverges at lambda = {0}")]
    AtCriticality(f64),
    #[error("gap {0:e} is not positive")]
    GaplessInput(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("normal equations are ill-conditioned (condition {0:e})")]
    IllConditioned(f64),
    #[error("likelihood is flat across the search interval")]
    FlatLikelihood,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
