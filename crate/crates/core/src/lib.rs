//! Stochastic multi-armed bandits with limited control variates.
//!
//! The numerical core ([`stats`], [`estimators`]) is generic over a
//! [`Scalar`] (`f32` or `f64`); the simulation layer ([`environments`],
//! [`policies`], [`simulator`]) runs at `f64`. Concrete aliases for the common
//! instantiations live at the crate root.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod scalar;

pub mod environments;
pub mod estimators;
pub mod policies;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ArmHistory64 = estimators::ArmHistory<f64>;
pub type ArmHistory32 = estimators::ArmHistory<f32>;
pub type CombinedEstimate64 = estimators::CombinedEstimate<f64>;
pub type CombinedEstimate32 = estimators::CombinedEstimate<f32>;
pub type CvEstimate64 = estimators::CvEstimate<f64>;
pub type CvEstimate32 = estimators::CvEstimate<f32>;
pub type TQuantileQuery64 = stats::TQuantileQuery<f64>;
pub type TQuantileQuery32 = stats::TQuantileQuery<f32>;
pub type Band64 = stats::Band<f64>;
