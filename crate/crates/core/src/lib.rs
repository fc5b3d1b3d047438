//! Exact, asymptotic and simulated laws of the largest censored and
//! uncensored survival times under the mixture cure model, and the `Q_n`
//! test for sufficient follow-up.

pub mod asymptotics;
pub mod config;
pub mod distmodel;
pub mod error;
pub mod exactdist;
pub mod followup;
pub mod montecarlo;
pub mod quadrature;
pub mod special;

pub use distmodel::{CureModel, DistributionSpec, Observation};
pub use error::{Error, Result};
