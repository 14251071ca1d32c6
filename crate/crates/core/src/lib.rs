//! Differential geometry of α-embedded density matrices.
//!
//! The crate works with positive definite Hermitian matrices and their
//! unit-trace slice, the faithful quantum states. Each such matrix is carried
//! into the Hermitian matrices by the power map `ℓ_α`, which induces dual
//! affine connections, monotone Riemannian metrics and the machinery to test
//! when the two connections are dual with respect to a metric.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod connections;
pub mod duality_lab;
pub mod error;
pub mod families;
pub mod fd;
pub mod manifold;
pub mod matrix_core;
pub mod metrics;
pub mod random;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectral-calculus.md")]
    mod spectral_calculus {}
    #[doc = include_str!("../../../book/src/embeddings.md")]
    mod embeddings {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/connections.md")]
    mod connections {}
    #[doc = include_str!("../../../book/src/duality.md")]
    mod duality {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
}
