//! Final-outcome simulation and asymptotic approximations for SIR epidemics
//! spreading through a population of large, weakly connected communities.
//!
//! The crate is organised bottom-up:
//!
//! - [`periods`]: infectious-period laws (Laplace transform, moments, sampling).
//! - [`analytic`]: deterministic limit quantities (fixed points, Lambert W,
//!   variances, covariance of the global-epidemic CLT).
//! - [`reedfrost`]: exact Reed-Frost final-size laws and samplers.
//! - [`sim`]: exact direct simulation of single- and multi-community epidemics.
//! - [`embed`]: the cumulative-pressure (embedding) engine and finite-`n` curves.
//! - [`approx`]: the approximating laws built from the limit quantities.
//! - [`stats`]: empirical comparisons (KS, binned total variation, summaries).
//! - [`replicate`]: deterministic per-replicate random streams and parallel runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod approx;
mod bigfloat;
pub mod embed;
mod error;
pub mod periods;
pub mod reedfrost;
pub mod replicate;
pub mod sim;
pub mod stats;

pub use analytic::LimitQuantities;
pub use approx::MixtureOfNormals;
pub use embed::CommunityPath;
pub use error::{Error, Result};
pub use periods::InfectiousPeriod;
pub use reedfrost::RfPmf;
pub use sim::{ModelParams, Outcome};
pub use stats::{Condition, ConditionalSummary, Field};
