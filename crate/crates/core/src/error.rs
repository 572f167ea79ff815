use thiserror::Error;

/// Errors raised by the operator-calculus routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("matrix is not diagonalizable within tolerance (eigenvector condition {condition:.3e} exceeds cap {cap:.1e})")]
    NonDiagonalizable { condition: f64, cap: f64 },
    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,
    #[error("slot index {index} out of range for {slots} slots")]
    SlotOutOfRange { index: usize, slots: usize },
    #[error("nodes {i} and {j} coincide within tolerance; use the contour or simplex-integral method")]
    CoincidentNodes { i: usize, j: usize },
    #[error("contour too tight: quadrature node within {distance:.3e} of an interpolation node")]
    ContourTooTight { distance: f64 },
    #[error("contour violation: {0}")]
    ContourViolation(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("negative power requested at a zero node")]
    ZeroNodeNegativePower,
    #[error("resolvent pole coincides with node {0}")]
    PoleAtNode(usize),
    #[error("series diverging: shell magnitudes grew for 3 consecutive shells")]
    SeriesDiverging,
    #[error("tuple does not commute: commutator of {i},{j} has relative norm {norm:.3e}")]
    NonCommutingTuple { i: usize, j: usize, norm: f64 },
    #[error("arity {0} exceeds the tensor-grid cap of 4 variables")]
    ArityCap(usize),
    #[error("tensor rule violated: product of single-variable values differs by {0:.3e}")]
    TensorRuleViolation(f64),
    #[error("quadrature did not converge: {0}")]
    QuadratureNoConvergence(String),
    #[error("decay violation: {0}")]
    DecayViolation(String),
    #[error("sector violation: eigenvalues {0:?} leave the strip")]
    SectorViolation(Vec<(f64, f64)>),
    #[error("Omega norm {0:.4} reached the principal-branch radius pi")]
    BranchRadiusExceeded(f64),
    #[error("step rejected: non-finite state at t = {0}")]
    StepRejected(f64),
    #[error("enumeration of {0} terms exceeds the cap")]
    EnumerationCap(u128),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
