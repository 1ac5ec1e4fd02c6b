//! Geometric Brownian motion conditioned on an extreme running maximum.
//!
//! The crate is organised bottom-up:
//!
//! - [`mathcore`]: normal distribution functions, Mills-ratio tail quantities,
//!   the first-passage density, adaptive quadrature and mergeable statistics.
//! - [`paths`]: reproducible path generation in log space, Brownian-bridge
//!   crossing detection and the rejection / exponentially tilted samplers for
//!   the conditional law given `max X >= B`.
//! - [`analytics`]: closed-form crossing probabilities, the limit curve
//!   `S (B/S)^{t/T}` and the hitting-time concentration functional.
//! - [`pricing`]: payoffs, the short-maturity asymptotic barrier price and a
//!   Monte Carlo pricer used to validate it.
//! - [`experiments`]: desk-scale verification runs producing
//!   [`experiments::ConvergenceReport`] and friends.
//! - [`report`]: CSV/JSON emission shared by the CLI and the tests.

pub mod analytics;
pub mod error;
pub mod experiments;
pub mod mathcore;
pub mod paths;
pub mod pricing;
pub mod report;

pub use error::{Error, Result};
