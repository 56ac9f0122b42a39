//! Potential theory of the isotropic α-stable process and its lower-order
//! non-local perturbation `L^b = Δ^{α/2} + S^b`.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: Gamma-type constants, incomplete integrals and adaptive
//!   quadrature used by every oracle check.
//! - [`geometry`]: balls, special Lipschitz domains, boxes and the distance
//!   functionals used by the samplers.
//! - [`kernels`]: jump kernels, Green functions, the ball Poisson kernel and
//!   its gradients, envelopes and scaling identities.
//! - [`sampler`]: exact walk-on-spheres exit sampling, one-sided and
//!   isotropic stable variates, and an approximate jump chain for
//!   mixed-stable paths.
//! - [`estimators`]: Monte-Carlo experiments (Harnack, boundary Harnack,
//!   decay, gradients, barrier) that report every statistic with its
//!   uncertainty.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod error;
pub mod estimators;
pub mod geometry;
pub mod kernels;
pub mod sampler;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::Point;
