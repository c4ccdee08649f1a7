//! Bound states of the fractional Schrödinger operator K_α |P|^α + g V on the
//! line: free Green's functions, Birman–Schwinger kernels and weak-coupling
//! ground-state solvers.

// `!(x > 0.0)` is used on purpose so NaN fails the check; reference
// constants keep all the digits they were generated with
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod birman_schwinger;
pub mod error;
pub mod greens;
pub mod ground_state;
pub mod potentials;
pub mod quadrature;
pub mod special;
pub mod validation;
pub mod weyl;

pub use error::{Error, Result};
pub use potentials::{Potential, PotentialKind};
pub use special::FractionalIndex;
