pub mod assembly;
pub mod error;
pub mod feature_net;
pub mod geometry;
pub mod harness;
pub mod nonlinear;
pub mod optimizer;
pub mod problems;
pub mod rng;

pub use error::{Error, Result};
