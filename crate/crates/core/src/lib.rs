//! Explicit spherical-cap coverings of the unit sphere and certified
//! approximation of tensor spectral and nuclear norms.
//!
//! The crate is organized around three layers:
//!
//! * [`tensor`] and [`linalg`]: dense tensors, multilinear forms, and the
//!   small-matrix spectral machinery (power iteration, Jacobi SVD,
//!   spectral-ball projection).
//! * [`covering`]: constructions of tau-hitting sets (grids, ternary sets,
//!   tuned level sets, Kronecker/append compositions) plus coverage
//!   verification and empirical discrepancy estimation.
//! * [`spectral`], [`nuclear`], [`harness`]: the approximation algorithms for
//!   the two tensor norms and the benchmark harness that exercises them on
//!   orthogonally decomposable instances with known norms.

pub mod error;
pub mod linalg;
pub mod rng;
pub mod tensor;

pub mod covering;
pub mod harness;
pub mod nuclear;
pub mod spectral;

pub use error::{Error, Result};
pub use tensor::{
    frobenius_inner, multilinear_form, partial_contract, DenseTensor, ModeAssignment, ModeEntry,
};
