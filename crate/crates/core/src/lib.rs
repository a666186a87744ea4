//! # qcbnorm-core
//!
//! Numerics for completely positive maps on finite-dimensional systems:
//! completely bounded 1→α quasi-norms for α ∈ [1/2, 1), sandwiched Rényi
//! divergences and the channel Rényi information built from them, channel
//! mutual information, relative entropy variance and channel dispersions.
//!
//! Every optimized quantity is computed by [`optimize::optimize_over_states`],
//! a multi-restart search over density matrices, and carries an
//! [`optimize::OptimizationOutcome`] describing how it was obtained.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`operator`] | Hermitian linear algebra, Schatten quasi-norms, tensor calculus, sampling |
//! | [`channel`] | Kraus/Choi/Stinespring forms, complementary maps, the channel zoo |
//! | [`entropy`] | Entropies, relative entropy, sandwiched Rényi divergence, variance |
//! | [`optimize`] | The optimizer over the density-matrix manifold |
//! | [`cbnorm`] | ‖·‖_{cb,1→α} via both equivalent expressions, multiplicativity gaps |
//! | [`info`] | I(N), I_α(N), dispersions and the additivity checks |
//!
//! All logarithms are base 2; every entropic value is in bits.

#![forbid(unsafe_code)]

pub mod cbnorm;
pub mod channel;
pub mod entropy;
pub mod error;
pub mod info;
pub mod operator;
pub mod optimize;
mod sandwich;

pub use error::{Error, Result};
