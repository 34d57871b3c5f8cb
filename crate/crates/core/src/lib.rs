//! Toolkit for conjugacy classes of finite-rank self-adjoint operators and
//! the commutativity-preserving transformations between them.
//!
//! The crate works on three levels:
//!
//! * combinatorial: class specs, labeled partitions of an orthonormal basis
//!   into eigenvalue slots, and the symmetries permuting equal-multiplicity
//!   slots ([`spectra`], [`apartments`]);
//! * numeric: dense complex realizations, commutation and compatibility
//!   predicates, partition recovery ([`matrixlab`]);
//! * structural: the clique geometry of orthocomplementary index pairs that
//!   characterizes orthogonality without touching matrices, and the
//!   decomposition of apartment-to-apartment maps into the canonical form
//!   `A -> U delta_A(A) U*` ([`structure`], [`transforms`]).
//!
//! Everything numeric is generic over the real scalar via [`scalar::Scalar`];
//! the `*64` aliases below fix `f64` for production use.

pub mod apartments;
pub mod error;
pub mod matrixlab;
pub mod scalar;
pub mod spectra;
pub mod structure;
pub mod tol;
pub mod transforms;
pub mod wire;

pub use error::{Error, RejectionCode, Result};
pub use scalar::Scalar;

pub type ClassSpec64 = spectra::ClassSpec<f64>;
pub type RawClassSpec64 = spectra::RawClassSpec<f64>;
pub type Operator64 = matrixlab::HermitianOperator<f64>;
pub type Basis64 = matrixlab::Basis<f64>;
pub type Subspace64 = matrixlab::Subspace<f64>;
pub type Tolerances64 = tol::ToleranceConfig<f64>;
pub type ModelMap64 = transforms::ModelMap<f64>;
pub type MapInput64 = transforms::MapInput<f64>;
pub type Decomposition64 = transforms::Decomposition<f64>;
