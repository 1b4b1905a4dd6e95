//! Phaseless measurement laboratory.
//!
//! Signals `x ∈ ℝⁿ` are observed only through `y = |Ax|` and can be recovered at
//! best up to a global sign. The crate provides the pieces needed to study how
//! many such measurements suffice:
//!
//! * [`ranktwo`]: the factorization `uuᵀ − vvᵀ = W R J Rᵀ Wᵀ` and its closed-form
//!   spectral scalars.
//! * [`concentration`]: the small-ball bound for `|aᵀ(uuᵀ − vvᵀ)a|` with `a`
//!   uniform on a ball, and a Monte Carlo estimator for the left-hand side.
//! * [`covering`]: greedy covering numbers and box-counting dimension slopes.
//! * [`sources`]: random source vectors (mixed discrete-continuous, exact sparse,
//!   finite sets).
//! * [`measurement`]: measurement ensembles and the phaseless operator.
//! * [`decoders`]: fiber-set and support-enumeration decoders.
//! * [`experiments`]: seeded sweeps that tie everything together.
//!
//! Data-parallel loops go through [`par`]; with the default `parallel` feature
//! they run on rayon, otherwise sequentially. Results never depend on the
//! number of worker threads.

// `!(x > 0.0)` style checks are there to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod covering;
pub mod decoders;
pub mod error;
pub mod experiments;
pub mod measurement;
pub mod par;
pub mod ranktwo;
pub mod rng;
pub mod sources;

pub use error::{Error, Result};
pub use par::Execution;
