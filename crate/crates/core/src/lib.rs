//! Time-changed Lévy processes observed at the first hitting times of
//! symmetric ε-barriers: rescaling and limit classification, stable exit
//! oracles, path simulation, V^ε(f) estimators and Monte Carlo studies.
//!
//! Numerical code is generic over the scalar type through [`Real`]; the
//! aliases below fix it to `f64`.

pub mod error;
pub mod estimators;
pub mod levy_models;
pub mod montecarlo;
pub mod parallel;
pub mod quadrature;
pub mod real;
pub mod rng;
pub mod simulation;
pub mod special;
pub mod stable_oracles;

pub use error::{Error, Result};
pub use real::Real;

pub type Triplet = levy_models::LevyTriplet<f64>;
pub type Model = levy_models::LevyModel<f64>;
pub type Jumps = levy_models::JumpSpec<f64>;
pub type Classification = levy_models::LimitClassification<f64>;
pub type Law = stable_oracles::LimitLaw<f64>;
pub type Report = montecarlo::StudyReport;
