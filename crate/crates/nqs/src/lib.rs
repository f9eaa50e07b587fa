//! Numerical library for restricted-Boltzmann-machine (RBM) representations
//! of 1D quantum spin-1/2 chains with periodic boundary conditions.
//!
//! The crate builds RBM wave functions — in particular translation-invariant
//! families whose weights factor into a level-decay profile λ(k̃) and a
//! localized orbital profile μ(r) — evaluates them in the log domain,
//! truncates their hidden layer, and certifies the resulting truncation
//! errors against closed-form upper bounds. Everything is checked at desk
//! scale (L ≤ 20) against brute-force state-vector enumeration and Lanczos
//! exact diagonalization.
//!
//! Module map:
//! - [`spinspace`]: basis configurations, Pauli strings, basis enumeration.
//! - [`rbm`]: RBM parameter containers and stable amplitude evaluation.
//! - [`lrfd`]: constructors for decay-profile RBM families (cluster state,
//!   perturbed cluster, constant-orbital delta approximators) and the edge
//!   importance measure η.
//! - [`bounds`]: the closed-form truncation-error machinery (P, Q, F₁, F₂,
//!   ratio bounds, level thresholds, complexity estimates, manifold table).
//! - [`exact`]: brute-force oracles — full state vectors, error measures,
//!   correlations, and matrix-free Lanczos ground states.
//! - [`vmc`]: variational Monte Carlo with stochastic reconfiguration for
//!   the translation-invariant ansatz.
//! - [`presets`]: named parameter presets used by the experiment driver.
//! - [`experiments`]: CSV-producing experiment runners behind the CLI.

pub mod bounds;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod lrfd;
pub mod presets;
pub mod rbm;
pub mod spinspace;
pub mod vmc;

pub use error::{Error, Result};
