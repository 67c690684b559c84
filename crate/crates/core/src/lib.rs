pub mod error;
pub mod formulas;
pub mod polygon;
pub mod sampler;
pub mod sphere_core;
pub mod verify;

pub use error::{Error, Result};
