//! Target controller: deterministic actor-critic trained from separate
//! real and synthetic replay buffers.

mod ddpg;
mod replay;

pub use ddpg::{bellman_target, BatchSource, DdpgController, DdpgParams, Observer, TrainReport};
pub use replay::ReplayBuffer;
