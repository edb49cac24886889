//! Analytic locality constants for quantum spin systems, checked against
//! exact dense simulation of small models.
//!
//! The library computes the constants entering Lieb-Robinson bounds
//! (pair-sum norms, convolution constants, interaction norms, surface
//! weights, velocity bounds), the quasi-locality error estimates that
//! follow from them (localization balls, Hamiltonian truncation, product
//! state correlations), exponential clustering envelopes for gapped
//! models, and the quasi-adiabatic spectral-flow construction used in the
//! Lieb-Schultz-Mattis variational gap bound. Every bound is paired with
//! an exact-diagonalization evaluation of the quantity it dominates, so
//! the inequalities can be asserted rather than trusted.
//!
//! Entry points:
//! - [`metric`]: finite metric site spaces and decay profiles `F_a`.
//! - [`interaction`]: interaction terms, norms, surfaces, Hamiltonians.
//! - [`quantum`]: dense spectral decompositions, evolutions, partial traces.
//! - [`locality`]: Lieb-Robinson and quasi-locality checks.
//! - [`clustering`]: spectral gaps and exponential clustering.
//! - [`lsm`]: twisted Hamiltonians and the quasi-adiabatic gap bound.
//! - [`harness`]: experiment configs, dispatch, deterministic CSV/JSON output.

// Force linkage of the system BLAS used by `ndarray`'s gemm paths.
use blas_src as _;
use openblas_src as _;

pub mod clustering;
pub mod error;
pub mod harness;
pub mod interaction;
pub mod locality;
pub mod lsm;
pub mod metric;
pub mod numerics;
pub mod quantum;
mod tensor;

pub use error::{Error, Result};
