use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Vector or matrix dimensions do not match the declared mode/channel counts.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An input that must span a subspace is rank deficient at the working tolerance.
    #[error("rank deficient input: {0}")]
    RankDeficient(String),

    /// A subspace expected to carry a nondegenerate symplectic form does not.
    #[error("degenerate symplectic form: {0}")]
    DegenerateSubspace(String),

    /// A subspace operation that requires even dimension received an odd one.
    #[error("odd-dimensional subspace: {0}")]
    OddDimension(String),

    /// A matrix expected to be symplectic is not, at the working tolerance.
    #[error("matrix is not symplectic (residual {residual:.3e} > tol {tol:.3e})")]
    NotSymplectic { residual: f64, tol: f64 },

    /// A subspace expected to be invariant under a map is not.
    #[error("subspace is not invariant (residual {residual:.3e} > tol {tol:.3e})")]
    NotInvariant { residual: f64, tol: f64 },

    /// A kernel description fails validation (sign, monotonicity, table shape).
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    /// The requested dark block does not fit inside the coupling's dark capacity.
    #[error("insufficient dark capacity: requested {requested}, available {available}")]
    InsufficientDarkCapacity { requested: usize, available: usize },

    /// A synthesis target matrix that must be symmetric is not.
    #[error("target matrix is not symmetric (asymmetry {0:.3e})")]
    NonSymmetricTarget(f64),

    /// The chosen integrator cannot handle the system's kernel families.
    #[error("method/kernel mismatch: {0}")]
    MethodKernelMismatch(String),

    /// The integrator step does not fit the horizon.
    #[error("invalid step: {0}")]
    StepTooLarge(String),

    /// A certificate file or structure is malformed.
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    /// A system description file or structure is malformed.
    #[error("malformed system description: {0}")]
    MalformedSpec(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
