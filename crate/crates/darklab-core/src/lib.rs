//! Dark-mode analysis for linear oscillator networks with memory.
//!
//! A network of `n` bosonic modes couples to `M` field channels through a
//! coupling matrix and a set of scalar memory kernels, one per channel.
//! The mean dynamics of the quadrature vector `x ∈ R^{2n}` is a linear
//! Volterra integro-differential equation: a Hamiltonian drift plus a
//! convolution of the state history against kernel-weighted coupling
//! matrices, driven by the input field.
//!
//! A *dark mode* is a collection of internal degrees of freedom that
//! (a) never hears the input field, (b) never leaks into the output
//! field, and (c) evolves autonomously under the Hamiltonian alone.
//! Algebraically it is a symplectic subspace, invariant under the drift
//! generator, sitting inside the kernel of the coupled quadrature map;
//! crucially the condition is kernel-independent, so one certificate
//! covers every memory profile sharing the same coupling.
//!
//! The crate provides:
//! - [`symplectic`]: the symplectic linear algebra the other modules sit on;
//! - [`model`]: system descriptions (Hamiltonian, coupling, kernels) and the
//!   derived state-space matrices;
//! - [`analysis`]: dark-mode detection with machine-checkable certificates;
//! - [`synthesis`]: Hamiltonian design that plants a prescribed dark block
//!   inside a fixed coupling;
//! - [`sim`]: mean-value integrators for the full memory dynamics;
//! - [`crosscheck`]: slow brute-force reference routines used to audit the
//!   fast paths;
//! - [`threemode`]: a worked three-mode, two-channel example with closed
//!   forms for every derived quantity.

pub mod analysis;
pub mod crosscheck;
mod error;
pub mod linalg;
pub mod model;
pub mod sim;
pub mod symplectic;
pub mod synthesis;
pub mod threemode;

pub use analysis::{
    DarkModeCertificate, ForbiddenCouplingReport, InconclusiveDiagnostics, NoDarkModeReason,
    Residuals, Verdict,
};
pub use error::Error;
pub use model::{DerivedMatrices, KernelSpec, SystemSpec};
pub use sim::{DriveSignal, SimMethod, Trajectory};
pub use symplectic::{SubspaceBasis, SymplecticBasis};
pub use synthesis::{SynthesisResult, SynthesisTarget};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
