//! Numerical laboratory for the output sets of quantum channels.
//!
//! The crate is `no_std` (it needs `alloc`) and has no IO. It covers:
//!
//! * [`matrix`], [`eigen`], [`bipartite`], [`state`]: dense complex linear
//!   algebra, Hermitian eigensolvers, partial traces, Schmidt decompositions,
//!   density matrices and entropies.
//! * [`channel`]: quantum channels in several representations (Stinespring
//!   isometry, Kraus list, entanglement-breaking, mixed-unitary, pinching,
//!   depolarizing) with adjoints, complements and Stinespring projections.
//! * [`random`]: seeded Haar unitaries/isometries, random pure states and
//!   random channel ensembles.
//! * [`oracles`]: closed-form limits (free unitary sum norms `psi`, the
//!   weighted sphere maximum `psi_star`, entanglement-breaking limits and the
//!   Stinespring minimizer profile).
//! * [`geometry`]: empirical probes of the output set (top eigenvalue probes,
//!   membership tests against a support function, the 1 -> infinity norm by
//!   alternating ascent, Weyl operators and entropy estimators).
//! * [`tensor_lab`]: tensor products with entanglement-breaking channels.
//!
//! Vectors on `C^k ⊗ C^n` are indexed left-factor major: `(i, j) ↦ i·n + j`.
//! Entropies are in nats.
#![no_std]

extern crate alloc;

pub mod bipartite;
pub mod channel;
pub mod eigen;
mod error;
pub mod geometry;
pub mod matrix;
pub mod oracles;
pub mod random;
pub mod state;
pub mod tensor_lab;

pub use channel::Channel;
pub use error::{Error, Result};
pub use matrix::{Matrix, C64};
pub use random::SeededRng;
pub use state::DensityMatrix;
