//! Simulation and verification tools for the functional Breuer–Major
//! theorem.
//!
//! The crate is layered bottom-up:
//!
//! * [`chaos`]: Hermite polynomials, Gauss–Hermite quadrature, Hermite
//!   expansions of `φ`, and the coefficient calculus of the
//!   Ornstein–Uhlenbeck operators.
//! * [`covariance`]: covariance models `ρ`, certified power sums and the
//!   fractional-noise regime classifier.
//! * [`sim`]: exact sampling of stationary Gaussian sequences with
//!   order-independent seeding.
//! * [`partial_sum`]: the normalized processes `Y_n` and `Z_n`.
//! * [`stats`]: `σ²`, the critical constant, the Ben Hariz series and the
//!   Monte Carlo checks (normality, Brownian covariance, moment bounds).
//! * [`experiment`]: JSON-configured experiments producing reports, CSV
//!   tables and manifests.
//!
//! ```
//! use bmlab::chaos::HermiteExpansion;
//! use bmlab::covariance::CovarianceModel;
//! use bmlab::stats::sigma_squared;
//!
//! let phi = HermiteExpansion::hermite(2);
//! let rho = CovarianceModel::exponential(0.5)?;
//! let s = sigma_squared(&phi, &rho, 40, 200)?;
//! assert!((s.value - 10.0 / 3.0).abs() < 1e-12);
//! # Ok::<(), bmlab::Error>(())
//! ```

pub mod chaos;
pub mod covariance;
mod error;
pub mod experiment;
pub mod partial_sum;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
