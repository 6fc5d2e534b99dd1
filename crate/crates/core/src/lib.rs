pub mod asymptotics;
pub mod error;
pub mod functionals;
mod gauss;
pub mod model;
pub mod montecarlo;
pub mod paths;
pub mod rng;
pub mod validation;

pub use error::{Error, Result};
