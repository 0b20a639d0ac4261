//! Numerical laboratory for entropy-based lower dimension bounds on
//! finite-horizon Koopman/DMD prediction.
//!
//! The crate provides:
//!
//! * a zoo of exactly computable measure-preserving systems ([`systems`]),
//! * finite measurable partitions, dynamical refinements and their
//!   static/conditional/dynamical entropies ([`partition`], [`entropy`]),
//! * L² machinery over those partitions: conditional expectations, Markov
//!   projections and the closed-form L¹ projection error ([`hilbert`]),
//! * analytic DMD / eDMD with exact worst-case k-step prediction error
//!   norms and the entropy dimension-bound harness ([`dmd`]),
//! * approximation-entropy brackets for finite vector sets and operator
//!   orbits, delay dictionaries and the delay-subspace harness ([`apr`]),
//! * spectral-measure diagnostics: autocorrelations, Wiener statistics,
//!   Fejér density estimates and orthonormal-orbit certificates
//!   ([`spectral`]).

pub mod apr;
pub mod dmd;
pub mod entropy;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod partition;
pub mod spectral;
pub mod systems;

pub use error::{Error, Result};
