//! Dense linear algebra, feed-forward networks, the adaptive-moment
//! optimizer and the seeded random stream used by every learned component.

mod adam;
mod matrix;
mod mlp;
mod rng;

pub use adam::{adam_step, AdamState};
pub use matrix::Matrix;
pub use mlp::{Activation, Mlp, MlpTrace};
pub use rng::RngStream;
