//! Pseudospectral toolkit for the generalized KdV-Benjamin family
//!
//!   u_t + γ ℋ u_xx + (-1)^{N+1} u_x^{(2N+1)} + Σ a_k u_x^{(2k+1)} + Σ b_k u^k u_x = 0
//!
//! on a large periodic domain, together with the diagnostic functionals
//! (conserved quantities, localized smoothing integrals, propagation-of-
//! regularity windows) and numerical verification of the operator calculus
//! the diagnostics rely on.
//!
//! Layer map:
//! - [`grid`], [`field`], [`ops`]: periodic grid, transforms, Fourier multipliers
//! - [`evolve`]: dealiased nonlinearity, integrating-factor RK4, Picard iteration
//! - [`weights`]: smooth cutoff families with analytic derivatives
//! - [`diag`]: norms, conserved quantities, smoothing/propagation functionals
//! - [`opcheck`]: empirical order measurements for the operator identities
//! - [`initial`], [`config`], [`experiment`]: data generation, JSON configs,
//!   batch execution and serialization

pub mod config;
pub mod diag;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod experiment;
pub mod field;
pub mod grid;
pub mod initial;
pub mod opcheck;
pub mod ops;
pub mod params;
pub mod rng;
pub mod weights;

pub use error::Error;
pub use field::SpectralField;
pub use grid::Grid;
pub use params::{DispersionMode, ModelParams};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
