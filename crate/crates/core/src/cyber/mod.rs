//! The learned dynamics model and the synthetic environment built on it.

mod env;
mod model;
mod normalizer;

pub use env::CyberEnv;
pub use model::{DynamicsModel, ModelConfig};
pub use normalizer::Normalizer;
