//! Ballistic quantum-state transfer through quasi-free spin chains.
//!
//! The crate models open spin-1/2 XX and XY chains whose dynamics reduces,
//! through the Jordan-Wigner transformation, to free fermions hopping on a
//! line. It provides:
//!
//! - [`chain`]: chain specifications, the tridiagonal hopping matrices
//!   `(A, B)` of the quadratic fermion Hamiltonian, and the mirror-symmetry
//!   predicates that state transfer requires;
//! - [`tridiag`]: a symmetric tridiagonal eigensolver (implicit QL), the
//!   numeric kernel behind every XX-chain computation;
//! - [`spectral`]: the canonical (Bogoliubov) diagonalization of the
//!   quadratic Hamiltonian, by singular value decomposition of `A - B` or,
//!   for mirror-symmetric chains, by the eigendecomposition of `(A - B) X`;
//! - [`dynamics`]: the Heisenberg evolution matrices `U(t)`, `V(t)` and the
//!   boundary transfer amplitudes that every fidelity formula consumes;
//! - [`channel`]: the affine qubit channel of the transmission, the optimal
//!   average fidelity, thermal parity factors, and the two-qubit-encoding
//!   channel;
//! - [`analytics`]: closed-form quasi-momenta, excitation densities,
//!   dispersion relations, optimal boundary fields and arrival times, used
//!   as independent cross-checks and optimizer seeds;
//! - [`optimizer`]: deterministic grid + Nelder-Mead searches for the
//!   boundary couplings maximizing a transfer objective;
//! - [`oracle`]: exact diagonalization in the full 2^N spin space (N <= 10),
//!   the ground truth for propagators, channels, parities and mirror phases.

pub mod analytics;
pub mod chain;
pub mod channel;
pub mod dynamics;
pub mod optimizer;
pub mod oracle;
pub mod spectral;
pub mod tridiag;

pub use chain::{build_hopping, ChainSpec, HoppingMatrices};
pub use spectral::{MirrorSpectralData, SpectralData};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("exact diagonalization capped at 10 sites, got {0}")]
    OracleCap(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
