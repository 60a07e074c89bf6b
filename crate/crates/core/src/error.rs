use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NonHermitian { defect: f64 },
    #[error("iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("vector is not a unit vector (norm {norm})")]
    NotUnitVector { norm: f64 },
    #[error("invalid Renyi order {p} (must be >= 1)")]
    InvalidOrder { p: f64 },
    #[error("not a density matrix: {reason}")]
    NotDensityMatrix { reason: &'static str },
    #[error("channel has no stored or materializable isometry")]
    RepresentationUnavailable,
    #[error("invalid POVM: {reason}")]
    InvalidPovm { reason: &'static str },
    #[error("matrix {index} is not unitary (defect {defect:e})")]
    NotUnitary { index: usize, defect: f64 },
    #[error("weights must be strictly positive and sum to one")]
    BadWeights,
    #[error("input vector is zero")]
    ZeroVector,
    #[error("degenerate input: all coefficients vanish")]
    DegenerateInput,
    #[error("subset is empty")]
    EmptySubset,
    #[error("k = {k} exceeds the supported maximum {max}")]
    CapacityExceeded { k: usize, max: usize },
    #[error("{what} out of range")]
    OutOfRange { what: &'static str },
    #[error("sample is empty")]
    EmptySample,
    #[error("ensemble probabilities must be non-negative and sum to one")]
    BadEnsemble,
    #[error("subspace dimension {subspace} must exceed {required}")]
    DimensionObstruction { subspace: usize, required: usize },
    #[error("POVM element {index} has operator norm {norm} (expected 1)")]
    HypothesisViolated { index: usize, norm: f64 },
    #[error("P is singular (lambda = 0)")]
    SingularP,
}
