//! Parametric lifetime and censoring laws, and the cure-model functions
//! `F*`, `H` and `J` built from them.

mod dist;
mod model;

pub use dist::{DistributionSpec, TailPower};
pub use model::{CureModel, Endpoints, EventTime, MassStrategy, Observation};
